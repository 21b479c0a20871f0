#include "bergman_lab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bergman_lab/expression.hpp"
#include "bergman_lab/polynomial.hpp"

namespace bergman_lab {

const std::vector<std::string>& registered_checks() {
  static const std::vector<std::string> names{
      "certify",           "schur_identity",    "trace_optimality", "distortion",          "twist",
      "reproducing",       "extremal",          "kernel_symmetry",  "section_value",       "direct_image_gram",
      "convergence",       "section_inequality", "log_inequality",  "det_inequality",      "psh_spectrum",
      "lgg_consistency",   "orthogonality",     "dbar_identity",    "hormander_bound",     "assembled_bound",
      "iteration"};
  return names;
}

bool is_registered_check(const std::string& name) {
  const auto& names = registered_checks();
  return std::find(names.begin(), names.end(), name) != names.end();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string format_complex(cplx z) {
  if (z.imag() == 0.0) return format_double(z.real());
  std::ostringstream os;
  os.precision(17);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

std::string join(const std::vector<std::string>& parts, const std::string& sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

// Key lookup with line-precise errors.
class Fields {
 public:
  explicit Fields(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    auto it = entries_.find(key);
    std::ostringstream os;
    if (it != entries_.end()) os << "line " << it->second.line << ", ";
    os << "field '" << key << "': " << msg;
    throw Error(ErrorKind::parse, os.str());
  }

  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second.value;
  }

  template <typename F>
  auto with(const std::string& key, F&& f) const {
    try {
      return f(str(key, ""));
    } catch (const Error& e) {
      fail(key, e.what());
    } catch (const std::exception& e) {
      fail(key, e.what());
    }
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return with(key, [&](const std::string& v) {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument("expected a finite number, got '" + v + "'");
      return d;
    });
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    return with(key, [&](const std::string& v) {
      std::size_t used = 0;
      const long long k = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument("expected an integer, got '" + v + "'");
      return k;
    });
  }

  std::vector<double> reals(const std::string& key) const {
    return with(key, [&](const std::string& v) {
      std::vector<double> out;
      for (const std::string& p : split(v, ',')) {
        std::size_t used = 0;
        const double d = std::stod(p, &used);
        if (used != p.size()) throw std::invalid_argument("expected a number, got '" + p + "'");
        out.push_back(d);
      }
      return out;
    });
  }

 private:
  std::map<std::string, Entry> entries_;
};

const std::set<std::string>& plain_keys() {
  static const std::set<std::string> keys{
      "id",           "base_dim",          "patch.center",     "patch.radius",       "t0",
      "fiber.kind",   "fiber.dim",         "fiber.radii",      "fiber.inner_radii",  "weight.kind",
      "weight.hessian", "weight.poly",     "weight.expr",      "frame",              "numerics.degree",
      "numerics.quadrature", "numerics.fd_step", "numerics.tolerance", "eps0",        "twist",
      "iteration.m",  "iteration.steps",   "iteration.start",  "grid.base_rings",    "grid.angles",
      "grid.fiber_rings", "checks",        "seed"};
  return keys;
}

// section.<i>.map / section.<i>.amplitude
bool section_key(const std::string& key, int* index, std::string* field) {
  if (key.rfind("section.", 0) != 0) return false;
  const auto dot = key.find('.', 8);
  if (dot == std::string::npos) return false;
  const std::string num = key.substr(8, dot - 8);
  if (num.empty() || !std::all_of(num.begin(), num.end(), ::isdigit)) return false;
  *field = key.substr(dot + 1);
  if (*field != "map" && *field != "amplitude") return false;
  *index = std::stoi(num);
  return *index >= 1;
}

void finalize(Scenario& s) {
  const int n = s.base_dim;
  if (s.patch.center.size() != n) throw Error(ErrorKind::parse, "field 'patch.center': must have base_dim coordinates");
  if (!(s.patch.radius > 0.0)) throw Error(ErrorKind::parse, "field 'patch.radius': must be positive");
  if (!s.patch.contains(s.t0, 1e-12)) {
    std::ostringstream os;
    os << "field 't0': point (" << s.t0.transpose() << ") is outside the base patch";
    throw Error(ErrorKind::outside_domain, os.str());
  }
  const Numerics& num = s.numerics;
  if (num.degree < 0 || num.degree > 64) throw Error(ErrorKind::parse, "field 'numerics.degree': must lie in [0, 64]");
  if (num.n_radial < 2 || num.n_angular < 4)
    throw Error(ErrorKind::parse, "field 'numerics.quadrature': need at least 2 radial and 4 angular nodes");
  if (!(num.fd_step > 0.0) || num.fd_step > 0.25)
    throw Error(ErrorKind::parse, "field 'numerics.fd_step': must lie in (0, 0.25]");
  if (!(num.tolerance > 0.0)) throw Error(ErrorKind::parse, "field 'numerics.tolerance': must be positive");
  if (s.iteration_m < 2) throw Error(ErrorKind::parse, "field 'iteration.m': must be >= 2");
  if (s.iteration_steps < 0 || s.iteration_steps > 12)
    throw Error(ErrorKind::parse, "field 'iteration.steps': must lie in [0, 12]");
  if (s.twist < 0.0) throw Error(ErrorKind::parse, "field 'twist': must be >= 0");

  // Sections must stay inside the fiber over the whole patch.
  std::vector<BasePoint> pts = s.sampling_grid().base_points;
  pts.push_back(s.t0);
  s.sections.validate_inside(s.fiber, pts);
}

}  // namespace

cplx parse_complex(const std::string& text) {
  const Polynomial p = parse_polynomial(text, 0, 0);
  return p.evaluate(CVector(0));
}

std::vector<std::pair<std::string, std::string>> Scenario::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  auto point = [](const CVector& v) {
    std::vector<std::string> parts;
    for (Index i = 0; i < v.size(); ++i) parts.push_back(format_complex(v(i)));
    return join(parts);
  };
  auto reals = [](const std::vector<double>& v) {
    std::vector<std::string> parts;
    for (double x : v) parts.push_back(format_double(x));
    return join(parts);
  };
  out.emplace_back("id", id);
  out.emplace_back("base_dim", std::to_string(base_dim));
  out.emplace_back("patch.center", point(patch.center));
  out.emplace_back("patch.radius", format_double(patch.radius));
  out.emplace_back("t0", point(t0));
  out.emplace_back("fiber.kind", to_string(fiber.kind));
  out.emplace_back("fiber.dim", std::to_string(fiber.dim()));
  out.emplace_back("fiber.radii", reals(fiber.outer));
  if (fiber.kind == DomainKind::annulus) out.emplace_back("fiber.inner_radii", reals(fiber.inner));
  out.emplace_back("weight.kind", weight_kind);
  out.emplace_back(weight_kind == "quadratic" ? "weight.hessian" : weight_kind == "polynomial" ? "weight.poly" : "weight.expr",
                   weight_source);
  for (std::size_t i = 0; i < section_sources.size(); ++i) {
    out.emplace_back("section." + std::to_string(i + 1) + ".map", section_sources[i].first);
    out.emplace_back("section." + std::to_string(i + 1) + ".amplitude", section_sources[i].second);
  }
  out.emplace_back("frame", frame_source);
  out.emplace_back("numerics.degree", std::to_string(numerics.degree));
  out.emplace_back("numerics.quadrature", std::to_string(numerics.n_radial) + ", " + std::to_string(numerics.n_angular));
  out.emplace_back("numerics.fd_step", format_double(numerics.fd_step));
  out.emplace_back("numerics.tolerance", format_double(numerics.tolerance));
  out.emplace_back("eps0", eps0 ? format_double(*eps0) : "certified");
  out.emplace_back("twist", format_double(twist));
  out.emplace_back("iteration.m", std::to_string(iteration_m));
  out.emplace_back("iteration.steps", std::to_string(iteration_steps));
  out.emplace_back("iteration.start", iteration_start == IterationStart::flat ? "flat" : "bergman");
  out.emplace_back("grid.base_rings", std::to_string(grid_base_rings));
  out.emplace_back("grid.angles", std::to_string(grid_angles));
  out.emplace_back("grid.fiber_rings", std::to_string(grid_fiber_rings));
  out.emplace_back("checks", join(checks));
  out.emplace_back("seed", std::to_string(seed));
  return out;
}

std::string Scenario::canonical() const {
  std::string out;
  for (const auto& [k, v] : echo()) out += k + " = " + v + "\n";
  return out;
}

SamplingGrid Scenario::sampling_grid() const {
  return make_sampling_grid(patch, fiber, grid_base_rings, grid_angles, grid_fiber_rings);
}

std::shared_ptr<const FiberSpace> Scenario::fiber_space() const {
  return make_fiber_space(fiber, numerics.degree, numerics.n_radial, numerics.n_angular);
}

Scenario parse_scenario(const std::string& text) {
  std::map<std::string, Entry> entries;
  std::map<int, std::map<std::string, Entry>> section_entries;
  {
    std::istringstream is(text);
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
      ++line;
      const auto hash = raw.find('#');
      const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos)
        throw Error(ErrorKind::parse, "line " + std::to_string(line) + ": expected 'key = value', got '" + body + "'");
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key.empty()) throw Error(ErrorKind::parse, "line " + std::to_string(line) + ": empty key");
      int idx = 0;
      std::string field;
      const bool is_section = section_key(key, &idx, &field);
      if (!is_section && plain_keys().count(key) == 0)
        throw Error(ErrorKind::parse, "line " + std::to_string(line) + ", field '" + key + "': unknown key");
      if (entries.count(key))
        throw Error(ErrorKind::parse, "line " + std::to_string(line) + ", field '" + key + "': duplicate key (first on line " +
                                          std::to_string(entries[key].line) + ")");
      entries[key] = Entry{value, line};
      if (is_section) section_entries[idx][field] = Entry{value, line};
    }
  }
  const Fields f(entries);
  Scenario s;
  s.id = f.str("id", "scenario");

  const long long n = f.integer("base_dim", 1);
  if (n < 1 || n > 3) f.fail("base_dim", "must be 1, 2 or 3");
  s.base_dim = static_cast<int>(n);

  // Fiber.
  {
    const std::string kind = f.str("fiber.kind", "disk");
    const long long d = f.integer("fiber.dim", kind == "disk" ? 1 : (f.has("fiber.radii") ? -1 : 1));
    std::vector<double> radii = f.has("fiber.radii") ? f.reals("fiber.radii") : std::vector<double>{};
    const int dim = d > 0 ? static_cast<int>(d) : static_cast<int>(radii.size());
    if (dim < 1 || dim > 2) f.fail("fiber.dim", "fiber dimension must be 1 or 2");
    if (radii.empty()) radii.assign(static_cast<std::size_t>(dim), 1.0);
    if (radii.size() == 1 && dim == 2) radii.push_back(radii[0]);
    if (static_cast<int>(radii.size()) != dim) f.fail("fiber.radii", "expected " + std::to_string(dim) + " radii");
    if (kind == "disk") {
      if (dim != 1) f.fail("fiber.kind", "a disk fiber is one-dimensional; use polydisc");
      s.fiber = FiberDomain::disk(radii[0]);
    } else if (kind == "polydisc") {
      s.fiber = FiberDomain::polydisc(radii);
    } else if (kind == "annulus") {
      if (!f.has("fiber.inner_radii")) f.fail("fiber.inner_radii", "required for an annulus fiber");
      std::vector<double> inner = f.reals("fiber.inner_radii");
      if (inner.size() == 1 && dim == 2) inner.push_back(inner[0]);
      if (static_cast<int>(inner.size()) != dim) f.fail("fiber.inner_radii", "expected " + std::to_string(dim) + " radii");
      s.fiber = FiberDomain::annulus(inner, radii);
    } else {
      f.fail("fiber.kind", "unknown domain kind '" + kind + "' (disk, polydisc, annulus)");
    }
    f.with("fiber.radii", [&](const std::string&) {
      s.fiber.validate();
      return 0;
    });
  }
  const int d = s.fiber.dim();

  // Numerics with dimension-dependent defaults.
  s.numerics.degree = static_cast<int>(f.integer("numerics.degree", d == 1 ? 24 : 10));
  if (d == 2) {
    s.numerics.n_radial = 12;
    s.numerics.n_angular = 24;
  }
  if (f.has("numerics.quadrature")) {
    const std::vector<double> q = f.reals("numerics.quadrature");
    if (q.size() != 2 || q[0] != std::floor(q[0]) || q[1] != std::floor(q[1]))
      f.fail("numerics.quadrature", "expected two integers 'n_radial, n_angular'");
    s.numerics.n_radial = static_cast<int>(q[0]);
    s.numerics.n_angular = static_cast<int>(q[1]);
  }
  s.numerics.fd_step = f.real("numerics.fd_step", 1e-2);
  s.numerics.tolerance = f.real("numerics.tolerance", 1e-3);

  // Patch and base point.
  auto parse_point = [&](const std::string& key) {
    return f.with(key, [&](const std::string& v) {
      const std::vector<std::string> parts = split(v, ',');
      if (static_cast<int>(parts.size()) != s.base_dim)
        throw Error(ErrorKind::parse, "expected " + std::to_string(s.base_dim) + " coordinates");
      BasePoint p(s.base_dim);
      for (int a = 0; a < s.base_dim; ++a) p(a) = parse_complex(parts[static_cast<std::size_t>(a)]);
      return p;
    });
  };
  s.patch.center = f.has("patch.center") ? parse_point("patch.center") : BasePoint(BasePoint::Zero(s.base_dim));
  s.patch.radius = f.real("patch.radius", 0.5);
  s.t0 = f.has("t0") ? parse_point("t0") : s.patch.center;

  // Weight.
  s.weight_kind = f.str("weight.kind", "quadratic");
  const int total = s.base_dim + d;
  if (s.weight_kind == "quadratic") {
    if (f.has("weight.hessian")) {
      s.weight_source = f.str("weight.hessian", "");
      const HermitianMatrix h = f.with("weight.hessian", [&](const std::string& v) {
        const std::vector<std::string> rows = split(v, ';');
        if (static_cast<int>(rows.size()) != total)
          throw Error(ErrorKind::parse, "expected " + std::to_string(total) + " rows separated by ';'");
        HermitianMatrix m(total, total);
        for (int r = 0; r < total; ++r) {
          const std::vector<std::string> cols = split(rows[static_cast<std::size_t>(r)], ',');
          if (static_cast<int>(cols.size()) != total)
            throw Error(ErrorKind::parse, "row " + std::to_string(r + 1) + " needs " + std::to_string(total) + " entries");
          for (int c = 0; c < total; ++c) m(r, c) = parse_complex(cols[static_cast<std::size_t>(c)]);
        }
        return m;
      });
      s.weight = f.with("weight.hessian", [&](const std::string&) { return WeightFamily::quadratic(h, s.base_dim, d); });
    } else {
      // |t|^2 + |z|^2.
      std::vector<std::string> rows;
      for (int r = 0; r < total; ++r) {
        std::vector<std::string> cols;
        for (int c = 0; c < total; ++c) cols.push_back(r == c ? "1" : "0");
        rows.push_back(join(cols));
      }
      s.weight_source = join(rows, "; ");
      s.weight = WeightFamily::quadratic(HermitianMatrix::Identity(total, total), s.base_dim, d);
    }
  } else if (s.weight_kind == "polynomial") {
    if (!f.has("weight.poly")) f.fail("weight.poly", "required for weight.kind = polynomial");
    s.weight_source = f.str("weight.poly", "");
    s.weight = f.with("weight.poly", [&](const std::string& v) {
      return WeightFamily::polynomial(parse_polynomial(v, s.base_dim, d), s.base_dim, d);
    });
  } else if (s.weight_kind == "custom") {
    if (!f.has("weight.expr")) f.fail("weight.expr", "required for weight.kind = custom");
    s.weight_source = f.str("weight.expr", "");
    s.weight = f.with("weight.expr", [&](const std::string& v) {
      return WeightFamily::custom(Expression::parse(v, s.base_dim, d), s.base_dim, d);
    });
  } else {
    f.fail("weight.kind", "unknown weight kind '" + s.weight_kind + "' (quadratic, polynomial, custom)");
  }

  // Sections.
  if (section_entries.empty()) {
    FiberPoint xi(d);
    for (int k = 0; k < d; ++k)
      xi(k) = s.fiber.kind == DomainKind::annulus ? 0.5 * (s.fiber.inner_radius(k) + s.fiber.outer[static_cast<std::size_t>(k)])
                                                  : 0.0;
    std::vector<std::string> parts;
    for (int k = 0; k < d; ++k) parts.push_back(format_complex(xi(k)));
    s.section_sources.emplace_back(join(parts), "1");
    s.sections = SectionFamily::constant(s.base_dim, xi);
  } else {
    int expected = 1;
    for (const auto& [idx, fields] : section_entries) {
      const std::string tag = "section." + std::to_string(idx);
      if (idx != expected) f.fail(tag + "." + fields.begin()->first, "sections must be numbered 1, 2, ... without gaps");
      ++expected;
      if (!fields.count("map")) f.fail(tag + ".map", "missing (amplitude given without a map)");
      const std::string map_text = fields.at("map").value;
      const std::string amp_text = fields.count("amplitude") ? fields.at("amplitude").value : "1";
      std::vector<Polynomial> map = f.with(tag + ".map", [&](const std::string& v) {
        std::vector<Polynomial> out;
        for (const std::string& part : split(v, ',')) out.push_back(parse_polynomial(part, s.base_dim, 0));
        if (static_cast<int>(out.size()) != d)
          throw Error(ErrorKind::parse, "expected " + std::to_string(d) + " comma-separated coordinates");
        return out;
      });
      Polynomial amp = fields.count("amplitude")
                           ? f.with(tag + ".amplitude", [&](const std::string& v) { return parse_polynomial(v, s.base_dim, 0); })
                           : Polynomial::constant(s.base_dim, 1.0);
      s.section_sources.emplace_back(map_text, amp_text);
      s.sections.add(std::move(map), std::move(amp));
      SectionFamily single;
      single.add(s.sections.maps.back(), s.sections.amplitudes.back());
      f.with(tag + ".map", [&](const std::string&) {
        single.validate_structure(s.base_dim, d);
        return 0;
      });
    }
  }

  // Frame for the determinant check.
  {
    std::vector<std::string> def{"1"};
    for (int k = 1; k <= d; ++k) def.push_back(d == 1 ? "z" : "z" + std::to_string(k));
    s.frame_source = f.str("frame", join(def));
    s.frame = f.with("frame", [&](const std::string&) { return parse_frame(s.frame_source, d); });
  }

  if (f.has("eps0") && f.str("eps0", "") != "certified") {
    const double e = f.real("eps0", 0.0);
    if (e < 0.0) f.fail("eps0", "must be >= 0");
    s.eps0 = e;
  }
  s.twist = f.real("twist", 0.0);
  s.iteration_m = static_cast<int>(f.integer("iteration.m", 2));
  s.iteration_steps = static_cast<int>(f.integer("iteration.steps", 8));
  {
    const std::string start = f.str("iteration.start", "flat");
    if (start == "flat") s.iteration_start = IterationStart::flat;
    else if (start == "bergman") s.iteration_start = IterationStart::bergman;
    else f.fail("iteration.start", "expected 'flat' or 'bergman', got '" + start + "'");
  }
  s.grid_base_rings = static_cast<int>(f.integer("grid.base_rings", 2));
  s.grid_angles = static_cast<int>(f.integer("grid.angles", 8));
  s.grid_fiber_rings = static_cast<int>(f.integer("grid.fiber_rings", 3));
  if (s.grid_base_rings < 0 || s.grid_angles < 1 || s.grid_fiber_rings < 1)
    f.fail("grid.angles", "grid needs base_rings >= 0, angles >= 1, fiber_rings >= 1");

  if (f.has("checks")) {
    const std::string v = f.str("checks", "");
    if (!v.empty()) {
      for (const std::string& name : split(v, ',')) {
        if (name == "all") {
          for (const std::string& c : registered_checks()) s.checks.push_back(c);
          continue;
        }
        if (!is_registered_check(name)) f.fail("checks", "unknown check '" + name + "'");
        s.checks.push_back(name);
      }
    }
  }
  {
    const long long seed = f.integer("seed", 0);
    if (seed < 0) f.fail("seed", "must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
  }

  try {
    finalize(s);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::parse) throw;
    throw Error(e.kind(), std::string("semantic error: ") + e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::invalid_argument, "cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

void apply_overrides(Scenario& s, const ScenarioOverrides& o) {
  if (o.fd_step) s.numerics.fd_step = *o.fd_step;
  if (o.degree) s.numerics.degree = *o.degree;
  if (o.seed) s.seed = *o.seed;
  finalize(s);
}

}  // namespace bergman_lab
