#include "bergman_lab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "bergman_lab/curvature.hpp"
#include "bergman_lab/hormander.hpp"
#include "bergman_lab/iteration.hpp"
#include "bergman_lab/polynomial.hpp"
#include "bergman_lab/weights.hpp"

namespace bergman_lab {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::shared_ptr<const FiberSpace> disk_space(int degree) {
  static std::map<int, std::shared_ptr<const FiberSpace>> cache;
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, make_fiber_space(FiberDomain::disk(1.0), degree, 64, 128)).first;
  return it->second;
}

BasePatch patch(int n) {
  BasePatch p;
  p.center = BasePoint::Zero(n);
  p.radius = 0.5;
  return p;
}

BasePoint base_point(int n) {
  BasePoint t(n);
  t(0) = cplx(0.1, 0.05);
  if (n > 1) t(1) = cplx(-0.05, 0.1);
  return t;
}

CheckConfig config(int n, int threads) {
  CheckConfig cfg;
  cfg.space = disk_space(24);
  cfg.patch = patch(n);
  cfg.threads = threads;
  return cfg;
}

// c|t|^2 + |z|^2 + 2 lambda Re(t zbar), n = 1.
WeightFamily weight_1d(double c, double lambda) {
  HermitianMatrix h(2, 2);
  h << c, lambda, lambda, 1.0;
  return WeightFamily::quadratic(h, 1, 1);
}

// |t|^2 + |z|^2 + 2 Re((lambda t1 + lambda/2 t2) zbar), n = 2.
WeightFamily weight_2d(double lambda) {
  HermitianMatrix h(3, 3);
  h << 1.0, 0.0, lambda, 0.0, 1.0, 0.5 * lambda, lambda, 0.5 * lambda, 1.0;
  return WeightFamily::quadratic(h, 2, 1);
}

SectionFamily constant_section(int n, double s) {
  FiberPoint xi(1);
  xi(0) = s;
  return SectionFamily::constant(n, xi);
}

// A section that moves with t and a non-constant amplitude.
SectionFamily moving_section(int n) {
  SectionFamily fam;
  const std::string map = n == 1 ? "0.2 + 0.3*t1" : "0.2 + 0.3*t1 - 0.2*i*t2";
  fam.add({parse_polynomial(map, n, 0)}, parse_polynomial("1 + 0.5*t1", n, 0));
  return fam;
}

double certified_eps0(const WeightFamily& w, int threads) {
  return certify(w, make_sampling_grid(patch(w.base_dim()), FiberDomain::disk(1.0)), threads).eps0;
}

struct Scenario {
  std::string name;
  WeightFamily weight;
  int n;
};

std::vector<Scenario> lambda_scenarios(bool with_zero) {
  std::vector<Scenario> out;
  for (double l : {0.0, 0.3, 0.5, 0.7}) {
    if (l == 0.0 && !with_zero) continue;
    std::ostringstream a, b;
    a << "n=1 lambda=" << l;
    b << "n=2 lambda=" << l;
    out.push_back({a.str(), weight_1d(1.0, l), 1});
    out.push_back({b.str(), weight_2d(l), 2});
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Runs the cases, records the slowest and the first failure.
class Tally {
 public:
  explicit Tally(AcceptanceResult& r) : r_(r) {}

  void time_case(const std::function<void()>& body) {
    const auto t = Clock::now();
    body();
    r_.slowest_case = std::max(r_.slowest_case, since(t));
  }
  void expect(bool ok, const std::string& what) {
    ++cases_;
    if (!ok && failures_.empty()) failures_ = what;
    if (!ok) ok_ = false;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  void finish() {
    r_.numeric_pass = ok_;
    r_.detail = std::to_string(cases_) + " checks";
    if (!notes_.empty()) r_.detail += "; " + notes_;
    if (!ok_) r_.detail += "; first failure: " + failures_;
  }

 private:
  AcceptanceResult& r_;
  bool ok_ = true;
  int cases_ = 0;
  std::string failures_;
  std::string notes_;
};

void a1(Tally& t, int threads) {
  double worst = 0.0;
  for (double c : {0.5, 1.0, 2.0}) {
    t.time_case([&] {
      const CurvatureReport r = check_log_inequality(weight_1d(c, 0.0), constant_section(1, 0.3), base_point(1), c, config(1, threads));
      const double err = std::abs(r.trace - c);
      worst = std::max(worst, err);
      t.expect(err < 1e-3, "c=" + fmt(c) + " trace " + fmt(r.trace));
    });
  }
  t.note("max |trace - c| = " + fmt(worst));
}

void a2(Tally& t, int threads) {
  double worst = 1e300;
  for (double l : {0.3, 0.5, 0.7}) {
    t.time_case([&] {
      const double eps0 = 1.0 - l * l;
      const CurvatureReport r = check_log_inequality(weight_1d(1.0, l), moving_section(1), base_point(1), eps0, config(1, threads));
      worst = std::min(worst, r.trace - eps0);
      t.expect(r.trace >= eps0 - 1e-3, "lambda=" + fmt(l) + " trace " + fmt(r.trace));
    });
  }
  for (double l : {0.3, 0.5, 0.7}) {
    t.time_case([&] {
      // lambda only in t1.
      HermitianMatrix h(3, 3);
      h << 1.0, 0.0, l, 0.0, 1.0, 0.0, l, 0.0, 1.0;
      const WeightFamily w = WeightFamily::quadratic(h, 2, 1);
      const double eps0 = certified_eps0(w, threads);
      const CurvatureReport r = check_log_inequality(w, moving_section(2), base_point(2), eps0, config(2, threads));
      worst = std::min(worst, r.trace - 2 * eps0);
      t.expect(std::abs(eps0 - (2.0 - l * l) / 2.0) < 1e-9, "n=2 certified eps0 " + fmt(eps0));
      t.expect(r.trace >= 2 * eps0 - 1e-3, "n=2 lambda=" + fmt(l) + " trace " + fmt(r.trace));
    });
  }
  t.note("min trace - n eps0 = " + fmt(worst));
}

void a3(Tally& t, int threads) {
  const std::vector<Polynomial> frame = parse_frame("1, z", 1);
  double worst = 0.0;
  for (double c : {0.5, 1.0, 2.0}) {
    t.time_case([&] {
      const CurvatureReport r = check_det_inequality(weight_1d(c, 0.0), frame, base_point(1), c, config(1, threads));
      worst = std::max(worst, std::abs(r.trace - 2 * c));
      t.expect(std::abs(r.trace - 2 * c) < 1e-3, "c=" + fmt(c) + " trace " + fmt(r.trace));
    });
  }
  t.time_case([&] {
    const CurvatureReport r = check_det_inequality(weight_1d(1.0, 0.5), frame, base_point(1), 0.75, config(1, threads));
    t.expect(r.trace >= 1.5 - 1e-3, "lambda=0.5 trace " + fmt(r.trace));
    t.note("lambda=0.5 trace " + fmt(r.trace) + " vs 1.5");
  });
  t.note("max |trace - 2c| = " + fmt(worst));
}

HermitianMatrix random_psd(std::mt19937_64& rng, int size) {
  std::normal_distribution<double> g;
  CMatrix a(size, size);
  for (Index r = 0; r < size; ++r)
    for (Index c = 0; c < size; ++c) a(r, c) = cplx(g(rng), g(rng));
  HermitianMatrix h = a * a.adjoint() / static_cast<double>(size) + 0.1 * HermitianMatrix::Identity(size, size);
  return 0.5 * (h + h.adjoint());
}

void a4(Tally& t, int) {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  t.time_case([&] {
    for (int n : {1, 2})
      for (int d : {1, 2})
        for (int k = 0; k < 50; ++k) {
          const ComplexHessian h = ComplexHessian::split(random_psd(rng, n + d), n);
          const double err = std::abs(ma_ratio(h, n, d) - schur_trace(h));
          worst = std::max(worst, err);
          t.expect(err < 1e-10, "n=" + std::to_string(n) + " d=" + std::to_string(d) + " error " + fmt(err));
        }
  });
  t.note("max error " + fmt(worst));
}

void a5(Tally& t, int) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> dim(1, 2);
  double min_gap = 1e300, worst_eq = 0.0;
  t.time_case([&] {
    for (int k = 0; k < 100; ++k) {
      const int n = dim(rng), d = dim(rng);
      const ComplexHessian h = normalize_fiber_block(ComplexHessian::split(random_psd(rng, n + d), n));
      CMatrix lambda(n, d);
      for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < d; ++b) lambda(a, b) = cplx(g(rng), g(rng));
      const double st = schur_trace(h);
      const double gap = trace_quadratic_form(h, lambda) - st;
      const double eq = std::abs(trace_quadratic_form(h, h.tf) - st);
      min_gap = std::min(min_gap, gap);
      worst_eq = std::max(worst_eq, eq);
      t.expect(gap >= -1e-12, "gap " + fmt(gap));
      t.expect(eq <= 1e-12, "equality error " + fmt(eq));
    }
  });
  t.note("min gap " + fmt(min_gap) + ", max equality error " + fmt(worst_eq));
}

void a6(Tally& t, int threads) {
  double worst_ratio = 0.0, worst_orth = 0.0;
  for (const Scenario& s : lambda_scenarios(true)) {
    t.time_case([&] {
      const HormanderData d = hormander_data(s.weight, moving_section(s.n), base_point(s.n), disk_space(24), 1e-2, threads);
      const HormanderCheck hb = hormander_bound_check(d, s.weight);
      const HormanderCheck orth = orthogonality_residual(d);
      worst_ratio = std::max(worst_ratio, hb.worst);
      worst_orth = std::max(worst_orth, orth.worst);
      t.expect(hb.pass, s.name + " Hormander ratio " + fmt(hb.worst));
      t.expect(orth.worst < 1e-6, s.name + " orthogonality " + fmt(orth.worst));
    });
  }
  t.note("max ratio " + fmt(worst_ratio) + ", max orthogonality residual " + fmt(worst_orth));
}

void a7(Tally& t, int threads) {
  double worst = 0.0, weakest_control = 1e300;
  for (const Scenario& s : lambda_scenarios(true)) {
    t.time_case([&] {
      const HormanderData d = hormander_data(s.weight, moving_section(s.n), base_point(s.n), disk_space(24), 1e-2, threads);
      const HormanderCheck c = dbar_identity_residual(d, s.weight);
      worst = std::max(worst, c.worst);
      t.expect(c.worst < 1e-4, s.name + " residual " + fmt(c.worst));
      if (s.weight.constant_hessian() != nullptr && (*s.weight.constant_hessian())(0, s.n) != 0.0) {
        const HormanderCheck raw = dbar_identity_residual(d, s.weight, true);
        weakest_control = std::min(weakest_control, raw.worst);
        t.expect(raw.worst > 1e-2, s.name + " negative control " + fmt(raw.worst));
      }
    });
  }
  t.note("max residual " + fmt(worst) + ", smallest negative control " + fmt(weakest_control));
}

void a8(Tally& t, int threads) {
  double worst_chain = 1e300, worst_bound = 1e300;
  for (const Scenario& s : lambda_scenarios(true)) {
    t.time_case([&] {
      const double eps0 = certified_eps0(s.weight, threads);
      const AssembledBound a = assembled_lower_bound(s.weight, moving_section(s.n), base_point(s.n), eps0, config(s.n, threads));
      worst_chain = std::min(worst_chain, a.chain_margin);
      worst_bound = std::min(worst_bound, a.bound_margin);
      t.expect(a.lhs >= a.rhs - 1e-3, s.name + " lhs " + fmt(a.lhs) + " < rhs " + fmt(a.rhs));
      t.expect(a.rhs >= s.n * eps0 * a.section_value - 1e-3, s.name + " rhs below n eps0 B");
    });
  }
  t.note("min lhs - rhs " + fmt(worst_chain) + ", min rhs - n eps0 B " + fmt(worst_bound));
}

void a9(Tally& t, int) {
  t.time_case([&] {
    const BergmanBasis b = bergman_basis(weight_1d(1.0, 0.5), base_point(1), disk_space(24));
    const MonomialBasis& mono = b.space->basis;
    const FiberFunction h = [&](const FiberPoint& z) {
      const CVector v = mono.evaluate(z);
      cplx s = 0.0;
      for (Index j = 0; j < 6; ++j) s += cplx(1.0 / (j + 1), 0.25 * j) * v(j);
      return s;
    };
    double worst_rep = 0.0, worst_ext = 0.0;
    for (double r : {0.0, 0.2, 0.45}) {
      FiberPoint w(1);
      w(0) = std::polar(r, 0.7);
      worst_rep = std::max(worst_rep, reproducing_residual(b, h, w));
      const auto [diag, ext] = extremal_check(b, w);
      worst_ext = std::max(worst_ext, std::abs(diag - ext) / diag);
    }
    t.expect(worst_rep < 1e-8, "reproducing residual " + fmt(worst_rep));
    t.expect(worst_ext < 1e-10, "extremal disagreement " + fmt(worst_ext));

    const BergmanBasis flat = bergman_basis(WeightFamily::quadratic(HermitianMatrix::Zero(2, 2), 1, 1), base_point(1),
                                            make_fiber_space(FiberDomain::disk(1.0), 12, 64, 128));
    const double k0 = kernel_eval(flat, FiberPoint::Zero(1), FiberPoint::Zero(1)).real();
    t.expect(std::abs(k0 - 1.0 / std::numbers::pi) < 1e-6, "flat K(0,0) " + fmt(k0));
    t.note("reproducing " + fmt(worst_rep) + ", extremal " + fmt(worst_ext) + ", |K(0,0) - 1/pi| " +
           fmt(std::abs(k0 - 1.0 / std::numbers::pi)));
  });
}

void a10(Tally& t, int threads) {
  double worst_ledger = 0.0, worst_margin = 1e300;
  for (int m : {2, 3}) {
    t.time_case([&] {
      IterationConfig cfg;
      cfg.check = config(1, threads);
      cfg.base_points = {BasePoint::Zero(1), base_point(1)};
      cfg.eps0 = 1.0;
      const IterationLedger ledger = run_iteration(weight_1d(1.0, 0.0), m, 8, cfg);
      t.expect(!ledger.aborted, "m=" + std::to_string(m) + " aborted: " + ledger.abort_reason);
      t.expect(ledger.steps.size() == 8, "m=" + std::to_string(m) + " ledger has " + std::to_string(ledger.steps.size()) + " steps");
      double prev = 0.0;
      for (const IterationStep& s : ledger.steps) {
        const double exact = 1.0 - std::pow(1.0 - 1.0 / m, s.k);
        worst_ledger = std::max(worst_ledger, std::abs(s.bound - exact));
        worst_margin = std::min(worst_margin, s.measured_trace - s.bound);
        t.expect(std::abs(s.bound - exact) <= 1e-15, "b_" + std::to_string(s.k) + " off closed form");
        t.expect(s.bound > prev, "ledger not increasing");
        t.expect(s.measured_trace >= s.bound - 1e-3, "m=" + std::to_string(m) + " k=" + std::to_string(s.k) +
                                                         " measured " + fmt(s.measured_trace));
        prev = s.bound;
      }
    });
  }
  t.note("max |b_k - closed form| " + fmt(worst_ledger) + ", min measured - n b_k " + fmt(worst_margin));
}

void a11(Tally& t, int threads) {
  double worst = 1e300;
  std::vector<Scenario> all = lambda_scenarios(true);
  for (double c : {0.5, 2.0}) all.push_back({"n=1 c=" + fmt(c), weight_1d(c, 0.0), 1});
  for (const Scenario& s : all) {
    t.time_case([&] {
      const double eps0 = certified_eps0(s.weight, threads);
      if (!(eps0 > 0.0)) return;
      const CurvatureReport r = check_log_inequality(s.weight, moving_section(s.n), base_point(s.n), eps0, config(s.n, threads));
      const double scale = std::max(1.0, r.hessian.norm());
      const double min_eig = min_eigenvalue(r.hessian);
      worst = std::min(worst, min_eig / scale);
      t.expect(min_eig >= -1e-6 * scale, s.name + " min eigenvalue " + fmt(min_eig));
    });
  }
  t.note("min eigenvalue / scale " + fmt(worst));
}

void a12(Tally& t, int) {
  t.time_case([&] {
    for (double eps0 : {1.0, 0.75, 0.3}) {
      const double v = distortion_margin(2, 0.1, eps0);
      const double exact = eps0 * 0.81 / 1.4641;  // 0.9^2 / 1.1^4
      t.expect(std::abs(v - exact) < 1e-12, "n=2 delta=0.1 value " + fmt(v));
      t.expect(std::abs(v / eps0 - 0.553241) < 5e-7, "ratio " + fmt(v / eps0));
    }
    t.expect(std::abs(distortion_margin(1, 0.1, 1.0) - 1.0 / 1.21) < 1e-12, "n=1 delta=0.1");
    for (int n : {1, 2, 3}) {
      double prev = distortion_margin(n, 0.0, 1.0);
      t.expect(prev == 1.0, "delta=0 is not the identity");
      for (int k = 1; k <= 50; ++k) {
        const double v = distortion_margin(n, 0.01 * k, 1.0);
        t.expect(v < prev, "not monotone at n=" + std::to_string(n));
        prev = v;
      }
    }
  });
  t.note("distortion(2, 0.1) = " + fmt(distortion_margin(2, 0.1, 1.0)));
}

struct Criterion {
  std::string title;
  double time_limit;
  void (*body)(Tally&, int);
};

const std::map<std::string, Criterion>& criteria() {
  static const std::map<std::string, Criterion> c{
      {"A1", {"separable equality for log B", 5.0, a1}},
      {"A2", {"cross-term lower bound for log B", 30.0, a2}},
      {"A3", {"determinant bound for the direct image frame", 30.0, a3}},
      {"A4", {"Schur trace equals the Monge-Ampere ratio", 1.0, a4}},
      {"A5", {"Schur trace is the minimum of the quadratic form", 1.0, a5}},
      {"A6", {"Hormander bound and orthogonality", 60.0, a6}},
      {"A7", {"dbar identity with negative control", 30.0, a7}},
      {"A8", {"assembled lower-bound chain", 60.0, a8}},
      {"A9", {"Bergman kernel infrastructure", 5.0, a9}},
      {"A10", {"iteration ledger", 300.0, a10}},
      {"A11", {"psh of log B over certified scenarios", 60.0, a11}},
      {"A12", {"distortion margin", 1.0, a12}},
  };
  return c;
}

}  // namespace

std::string AcceptanceResult::line() const {
  std::ostringstream os;
  os.precision(3);
  os << (pass() ? "PASS " : "FAIL ") << id << " " << title << " [" << std::fixed << seconds << " s, slowest case "
     << slowest_case << " s, limit " << time_limit << " s] " << detail;
  if (numeric_pass && !within_time()) os << " (over time limit)";
  return os.str();
}

const std::vector<std::string>& acceptance_ids() {
  static const std::vector<std::string> ids{"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11", "A12"};
  return ids;
}

AcceptanceResult run_criterion(const std::string& id, int threads) {
  const auto it = criteria().find(id);
  if (it == criteria().end()) throw Error(ErrorKind::invalid_argument, "unknown acceptance criterion '" + id + "'");
  AcceptanceResult r;
  r.id = id;
  r.title = it->second.title;
  r.time_limit = it->second.time_limit;
  Tally tally(r);
  const auto start = Clock::now();
  try {
    it->second.body(tally, threads);
    tally.finish();
  } catch (const std::exception& e) {
    tally.finish();
    r.numeric_pass = false;
    r.detail += "; error: " + std::string(e.what());
  }
  r.seconds = since(start);
  return r;
}

std::vector<AcceptanceResult> run_acceptance(int threads, const std::vector<std::string>& only) {
  std::vector<AcceptanceResult> out;
  for (const std::string& id : acceptance_ids()) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    out.push_back(run_criterion(id, threads));
  }
  return out;
}

}  // namespace bergman_lab
