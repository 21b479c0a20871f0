#include "bergman_lab/bergman.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bergman_lab/parallel.hpp"

namespace bergman_lab {

std::shared_ptr<const FiberSpace> make_fiber_space(const FiberDomain& domain, int degree, int n_radial,
                                                   int n_angular) {
  auto space = std::make_shared<FiberSpace>();
  space->domain = domain;
  space->quad = build_quadrature(domain, n_radial, n_angular);
  space->basis = monomial_basis(domain.dim(), degree);
  space->monomials = space->basis.evaluate_rows(space->quad.nodes);
  space->diff = PolarDifferentiator(space->quad);
  return space;
}

RVector slice_weights(const WeightFamily& w, const BasePoint& t, const QuadratureRule& quad) {
  RVector out(quad.size());
  for (Index q = 0; q < quad.size(); ++q) out(q) = std::exp(-w.value(t, quad.node(q)));
  return out;
}

CVector BergmanBasis::frame(const FiberPoint& xi) const {
  return transform.transpose() * space->basis.evaluate(xi);
}

CMatrix BergmanBasis::frame_on_nodes() const { return space->monomials * transform; }

BergmanBasis bergman_basis_from_values(const BasePoint& t, const RVector& weight_values,
                                       std::shared_ptr<const FiberSpace> space, std::string weight_ref) {
  if (!space) throw Error(ErrorKind::invalid_argument, "missing fiber space");
  BergmanBasis b;
  b.t = t;
  b.degree = space->degree();
  b.weight_ref = std::move(weight_ref);
  b.weight_values = weight_values;
  b.gram = gram_matrix(space->monomials, weight_values, space->quad);
  Orthonormalization o = orthonormalize(b.gram, &space->basis);
  b.transform = std::move(o.transform);
  b.condition = o.condition;
  b.space = std::move(space);
  return b;
}

BergmanBasis bergman_basis(const WeightFamily& w, const BasePoint& t, std::shared_ptr<const FiberSpace> space) {
  if (!space) throw Error(ErrorKind::invalid_argument, "missing fiber space");
  if (w.fiber_dim() != space->domain.dim())
    throw Error(ErrorKind::invalid_argument, "weight and fiber dimensions differ");
  RVector values = slice_weights(w, t, space->quad);
  return bergman_basis_from_values(t, values, std::move(space), w.describe());
}

cplx kernel_eval(const BergmanBasis& b, const FiberPoint& z, const FiberPoint& w) {
  return b.frame(w).dot(b.frame(z));
}

double kernel_diagonal(const BergmanBasis& b, const FiberPoint& z, int degree) {
  const Index m = b.space->basis.size_up_to(degree);
  return b.frame(z).head(m).squaredNorm();
}

CVector kernel_column(const BergmanBasis& b, const FiberPoint& w) {
  return b.frame_on_nodes() * b.frame(w).conjugate();
}

double reproducing_residual(const BergmanBasis& b, const FiberFunction& h, const FiberPoint& w) {
  const QuadratureRule& quad = b.space->quad;
  CVector hv(quad.size());
  for (Index q = 0; q < quad.size(); ++q) hv(q) = h(quad.node(q));
  const cplx projected = weighted_inner_product(hv, kernel_column(b, w), b.weight_values, quad);
  return std::abs(h(w) - projected);
}

std::pair<double, double> extremal_check(const BergmanBasis& b, const FiberPoint& w) {
  const double diag = kernel_eval(b, w, w).real();
  const CVector m = b.space->basis.evaluate(w);
  Eigen::LDLT<CMatrix> ldlt(b.gram);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::degenerate_basis, "Gram LDLT failed");
  const CVector x = ldlt.solve(m.conjugate());
  const double extremal = (m.transpose() * x)(0).real();
  return {diag, extremal};
}

ConvergenceDiagnostic kernel_convergence(const BergmanBasis& b, const std::vector<FiberPoint>& points,
                                         double tolerance) {
  ConvergenceDiagnostic out;
  out.degree = b.degree;
  const int lower = std::max(0, b.degree - 2);
  for (const FiberPoint& z : points) {
    const double kn = kernel_diagonal(b, z, b.degree);
    const double km = kernel_diagonal(b, z, lower);
    const double rel = kn > 0.0 ? (kn - km) / kn : 0.0;
    if (rel >= out.relative_change) {
      out.relative_change = rel;
      out.kernel_n = kn;
      out.kernel_n_minus_2 = km;
    }
  }
  out.converged = out.relative_change < tolerance;
  return out;
}

FiberPoint SectionFamily::section(int i, const BasePoint& t) const {
  const auto& map = maps[static_cast<std::size_t>(i)];
  FiberPoint xi(static_cast<Index>(map.size()));
  for (std::size_t k = 0; k < map.size(); ++k) xi(static_cast<Index>(k)) = map[k].evaluate(t);
  return xi;
}

cplx SectionFamily::amplitude(int i, const BasePoint& t) const {
  return amplitudes[static_cast<std::size_t>(i)].evaluate(t);
}

SectionFamily SectionFamily::constant(int n, const FiberPoint& xi, cplx a) {
  SectionFamily fam;
  std::vector<Polynomial> map;
  for (Index k = 0; k < xi.size(); ++k) map.push_back(Polynomial::constant(n, xi(k)));
  fam.add(std::move(map), Polynomial::constant(n, a));
  return fam;
}

void SectionFamily::add(std::vector<Polynomial> map, Polynomial amplitude) {
  maps.push_back(std::move(map));
  amplitudes.push_back(std::move(amplitude));
}

namespace {

bool is_holomorphic(const Polynomial& p) {
  const auto n = static_cast<std::size_t>(p.nvars());
  for (const auto& [key, c] : p.terms())
    for (std::size_t j = n; j < 2 * n; ++j)
      if (key[j] != 0) return false;
  return true;
}

}  // namespace

void SectionFamily::validate_structure(int n, int d) const {
  if (maps.size() != amplitudes.size()) throw Error(ErrorKind::invalid_argument, "each section needs one amplitude");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const std::string tag = "section " + std::to_string(i + 1);
    if (static_cast<int>(maps[i].size()) != d)
      throw Error(ErrorKind::invalid_argument, tag + " must have " + std::to_string(d) + " fiber coordinates");
    for (const Polynomial& p : maps[i]) {
      if (p.nvars() != n) throw Error(ErrorKind::invalid_argument, tag + " map must use the base variables only");
      if (!is_holomorphic(p)) throw Error(ErrorKind::invalid_argument, tag + " map is not holomorphic");
      if (p.total_degree() > 4) throw Error(ErrorKind::invalid_argument, tag + " map has degree > 4");
    }
    const Polynomial& a = amplitudes[i];
    if (a.nvars() != n) throw Error(ErrorKind::invalid_argument, tag + " amplitude must use the base variables only");
    if (!is_holomorphic(a)) throw Error(ErrorKind::invalid_argument, tag + " amplitude is not holomorphic");
    if (a.total_degree() > 4) throw Error(ErrorKind::invalid_argument, tag + " amplitude has degree > 4");
  }
}

void SectionFamily::validate_inside(const FiberDomain& fiber, const std::vector<BasePoint>& points,
                                    double margin_frac) const {
  for (int i = 0; i < size(); ++i) {
    for (const BasePoint& t : points) {
      const FiberPoint xi = section(i, t);
      if (!fiber.contains(xi, margin_frac)) {
        std::ostringstream os;
        os << "section " << (i + 1) << " value (" << xi.transpose() << ") at t = (" << t.transpose()
           << ") is not " << margin_frac << " * radius inside the " << to_string(fiber.kind) << " fiber";
        throw Error(ErrorKind::outside_domain, os.str());
      }
    }
  }
}

std::vector<FiberPoint> section_points(const SectionFamily& fam, const BasePoint& t) {
  std::vector<FiberPoint> pts;
  for (int i = 0; i < fam.size(); ++i) pts.push_back(fam.section(i, t));
  return pts;
}

double section_value(const BergmanBasis& b, const SectionFamily& fam) {
  CVector v = CVector::Zero(b.size());
  for (int i = 0; i < fam.size(); ++i) {
    const FiberPoint xi = fam.section(i, b.t);
    if (!b.space->domain.contains(xi)) {
      std::ostringstream os;
      os << "section " << (i + 1) << " value (" << xi.transpose() << ") left the fiber at t = ("
         << b.t.transpose() << ")";
      throw Error(ErrorKind::outside_domain, os.str());
    }
    v += fam.amplitude(i, b.t) * b.frame(xi);
  }
  return v.squaredNorm();
}

double section_value(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t,
                     std::shared_ptr<const FiberSpace> space) {
  return section_value(bergman_basis(w, t, std::move(space)), fam);
}

double DirectImageGram::log_det(std::size_t i) const { return log_det_hpd(grams.at(i)); }

double log_det_hpd(const HermitianMatrix& g) {
  Eigen::LLT<CMatrix> llt(0.5 * (g + g.adjoint()));
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::indefinite, "Gram matrix is not positive definite");
  const CMatrix l = llt.matrixL();
  double s = 0.0;
  for (Index j = 0; j < l.rows(); ++j) {
    const double v = l(j, j).real();
    if (!(v > 0.0)) throw Error(ErrorKind::indefinite, "Gram matrix is not positive definite");
    s += 2.0 * std::log(v);
  }
  return s;
}

HermitianMatrix frame_gram(const WeightFamily& w, const std::vector<Polynomial>& frame, const BasePoint& t,
                           const FiberSpace& space) {
  if (frame.empty()) throw Error(ErrorKind::invalid_argument, "empty frame");
  const QuadratureRule& quad = space.quad;
  CMatrix values(quad.size(), static_cast<Index>(frame.size()));
  for (std::size_t j = 0; j < frame.size(); ++j) {
    if (frame[j].nvars() != space.domain.dim())
      throw Error(ErrorKind::invalid_argument, "frame functions must use the fiber variables only");
    for (Index q = 0; q < quad.size(); ++q) values(q, static_cast<Index>(j)) = frame[j].evaluate(quad.node(q));
  }
  HermitianMatrix g = gram_matrix(values, slice_weights(w, t, quad), quad);
  try {
    (void)orthonormalize(g);
  } catch (const Error& e) {
    throw Error(ErrorKind::degenerate_basis, std::string("degenerate frame: ") + e.what());
  }
  return g;
}

DirectImageGram direct_image_gram(const WeightFamily& w, const std::vector<Polynomial>& frame,
                                  const std::vector<BasePoint>& points, std::shared_ptr<const FiberSpace> space,
                                  int threads) {
  DirectImageGram out;
  out.frame = frame;
  out.points = points;
  out.grams.resize(points.size());
  for (const Polynomial& f : frame)
    if (!is_holomorphic(f)) throw Error(ErrorKind::invalid_argument, "frame functions must be holomorphic");
  parallel_for(points.size(), threads, [&](std::size_t i) { out.grams[i] = frame_gram(w, frame, points[i], *space); });
  return out;
}

std::vector<Polynomial> parse_frame(const std::string& text, int fiber_dim) {
  std::vector<Polynomial> out;
  int depth = 0;
  std::string current;
  auto flush = [&] {
    if (current.find_first_not_of(" \t") == std::string::npos) throw Error(ErrorKind::parse, "empty frame entry in \"" + text + "\"");
    Polynomial p = parse_polynomial(current, 0, fiber_dim);
    if (!is_holomorphic(p)) throw Error(ErrorKind::parse, "frame entry \"" + current + "\" is not holomorphic");
    out.push_back(std::move(p));
    current.clear();
  };
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      flush();
      continue;
    }
    current += c;
  }
  flush();
  return out;
}

}  // namespace bergman_lab
