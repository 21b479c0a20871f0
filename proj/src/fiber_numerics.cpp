#include "bergman_lab/fiber_numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bergman_lab {

namespace {

constexpr double kPi = std::numbers::pi;

// Fourier differentiation matrix on n equispaced periodic points.
RMatrix fourier_diff_matrix(int n) {
  RMatrix d = RMatrix::Zero(n, n);
  const double h = 2.0 * kPi / n;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const int m = j - k;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const double x = 0.5 * m * h;
      d(j, k) = (n % 2 == 0) ? 0.5 * sign / std::tan(x) : 0.5 * sign / std::sin(x);
    }
  }
  return d;
}

// Barycentric differentiation matrix for interpolation on `x`.
RMatrix barycentric_diff_matrix(const RVector& x) {
  const Index n = x.size();
  RVector w(n);
  for (Index j = 0; j < n; ++j) {
    double prod = 1.0;
    for (Index k = 0; k < n; ++k)
      if (k != j) prod *= (x(j) - x(k));
    w(j) = 1.0 / prod;
  }
  RMatrix d = RMatrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double diag = 0.0;
    for (Index k = 0; k < n; ++k) {
      if (k == j) continue;
      d(j, k) = (w(k) / w(j)) / (x(j) - x(k));
      diag -= d(j, k);
    }
    d(j, j) = diag;
  }
  return d;
}

}  // namespace

const char* to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::disk: return "disk";
    case DomainKind::polydisc: return "polydisc";
    case DomainKind::annulus: return "annulus";
  }
  return "?";
}

FiberDomain FiberDomain::disk(double radius) {
  return FiberDomain{DomainKind::disk, {radius}, {0.0}};
}

FiberDomain FiberDomain::polydisc(std::vector<double> radii) {
  std::vector<double> zeros(radii.size(), 0.0);
  return FiberDomain{DomainKind::polydisc, std::move(radii), std::move(zeros)};
}

FiberDomain FiberDomain::annulus(std::vector<double> inner, std::vector<double> outer) {
  return FiberDomain{DomainKind::annulus, std::move(outer), std::move(inner)};
}

double FiberDomain::inner_radius(int coord) const {
  return coord < static_cast<int>(inner.size()) ? inner[static_cast<std::size_t>(coord)] : 0.0;
}

double FiberDomain::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) {
    const double ro = outer[static_cast<std::size_t>(a)];
    const double ri = inner_radius(a);
    v *= kPi * (ro * ro - ri * ri);
  }
  return v;
}

void FiberDomain::validate() const {
  if (dim() < 1) throw Error(ErrorKind::invalid_argument, "fiber dimension must be >= 1");
  if (dim() > 2)
    throw Error(ErrorKind::invalid_argument,
                "fiber dimension " + std::to_string(dim()) + " exceeds the desk-scale limit 2");
  if (kind == DomainKind::disk && dim() != 1)
    throw Error(ErrorKind::invalid_argument, "a disk fiber has dimension 1; use polydisc");
  for (int a = 0; a < dim(); ++a) {
    const double ro = outer[static_cast<std::size_t>(a)];
    const double ri = inner_radius(a);
    if (!(ro > 0.0) || !std::isfinite(ro))
      throw Error(ErrorKind::invalid_argument, "fiber radius must be positive");
    if (kind == DomainKind::annulus) {
      if (!(ri > 0.0))
        throw Error(ErrorKind::invalid_argument, "annulus inner radius must be positive");
      if (ri >= ro) {
        std::ostringstream os;
        os << "annulus inner radius " << ri << " >= outer radius " << ro;
        throw Error(ErrorKind::invalid_argument, os.str());
      }
    } else if (ri != 0.0) {
      throw Error(ErrorKind::invalid_argument, "inner radii are only allowed for annulus fibers");
    }
  }
}

bool FiberDomain::contains(const FiberPoint& xi, double margin_frac) const {
  if (xi.size() != dim()) return false;
  for (int a = 0; a < dim(); ++a) {
    const double ro = outer[static_cast<std::size_t>(a)];
    const double margin = margin_frac * ro;
    const double r = std::abs(xi(a));
    if (!std::isfinite(r) || r > ro - margin) return false;
    if (kind == DomainKind::annulus && r < inner_radius(a) + margin) return false;
  }
  return true;
}

std::pair<RVector, RVector> gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::invalid_argument, "Gauss-Legendre needs n >= 1");
  RVector x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = z;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0, p1 = z;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    x(i) = -z;
    x(n - 1 - i) = z;
    w(i) = wi;
    w(n - 1 - i) = wi;
  }
  if (n % 2 == 1) x(n / 2) = 0.0;
  return {x, w};
}

QuadratureRule build_quadrature(const FiberDomain& domain, int n_radial, int n_angular) {
  domain.validate();
  if (n_radial < 4) throw Error(ErrorKind::invalid_argument, "n_radial must be >= 4");
  if (n_angular < 8) throw Error(ErrorKind::invalid_argument, "n_angular must be >= 8");

  const auto [ref_x, ref_w] = gauss_legendre(n_radial);
  QuadratureRule quad;
  quad.n_radial = n_radial;
  quad.n_angular = n_angular;
  const int d = domain.dim();
  for (int a = 0; a < d; ++a) {
    PolarAxis axis;
    axis.r_in = domain.inner_radius(a);
    axis.r_out = domain.outer[static_cast<std::size_t>(a)];
    const double half = 0.5 * (axis.r_out - axis.r_in);
    const double mid = 0.5 * (axis.r_out + axis.r_in);
    axis.radii = (ref_x.array() * half + mid).matrix();
    axis.radial_weights = ref_w * half;
    axis.angles = RVector(n_angular);
    for (int j = 0; j < n_angular; ++j) axis.angles(j) = 2.0 * kPi * j / n_angular;
    quad.axes.push_back(std::move(axis));
  }

  const Index block = static_cast<Index>(n_radial) * n_angular;
  Index total = 1;
  for (int a = 0; a < d; ++a) total *= block;
  quad.nodes.resize(total, d);
  quad.weights.resize(total);
  const double angular_weight = 2.0 * kPi / n_angular;

  for (Index q = 0; q < total; ++q) {
    Index rest = q;
    double w = 1.0;
    for (int a = d - 1; a >= 0; --a) {
      const Index local = rest % block;
      rest /= block;
      const Index ir = local / n_angular;
      const Index j = local % n_angular;
      const PolarAxis& axis = quad.axes[static_cast<std::size_t>(a)];
      const double r = axis.radii(ir);
      quad.nodes(q, a) = std::polar(r, axis.angles(j));
      w *= axis.radial_weights(ir) * r * angular_weight;
    }
    quad.weights(q) = w;
  }
  return quad;
}

int MonomialBasis::degree(Index j) const {
  int s = 0;
  for (int e : exponents[static_cast<std::size_t>(j)]) s += e;
  return s;
}

Index MonomialBasis::size_up_to(int deg) const {
  Index count = 0;
  for (Index j = 0; j < size(); ++j)
    if (degree(j) <= deg) ++count;
  return count;
}

CVector MonomialBasis::evaluate(const FiberPoint& xi) const {
  CVector out(size());
  // Power tables per coordinate.
  std::vector<std::vector<cplx>> powers(static_cast<std::size_t>(dim));
  for (int a = 0; a < dim; ++a) {
    auto& p = powers[static_cast<std::size_t>(a)];
    p.resize(static_cast<std::size_t>(max_degree) + 1);
    p[0] = 1.0;
    for (int k = 1; k <= max_degree; ++k) p[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(k) - 1] * xi(a);
  }
  for (Index j = 0; j < size(); ++j) {
    cplx v = 1.0;
    const auto& e = exponents[static_cast<std::size_t>(j)];
    for (int a = 0; a < dim; ++a) v *= powers[static_cast<std::size_t>(a)][static_cast<std::size_t>(e[static_cast<std::size_t>(a)])];
    out(j) = v;
  }
  return out;
}

CMatrix MonomialBasis::evaluate_rows(const CMatrix& points) const {
  CMatrix out(points.rows(), size());
  for (Index q = 0; q < points.rows(); ++q) out.row(q) = evaluate(points.row(q).transpose()).transpose();
  return out;
}

std::string MonomialBasis::name(Index j) const {
  const auto& e = exponents[static_cast<std::size_t>(j)];
  std::ostringstream os;
  bool any = false;
  for (int a = 0; a < dim; ++a) {
    if (e[static_cast<std::size_t>(a)] == 0) continue;
    if (any) os << "*";
    os << "z" << (a + 1);
    if (e[static_cast<std::size_t>(a)] > 1) os << "^" << e[static_cast<std::size_t>(a)];
    any = true;
  }
  return any ? os.str() : "1";
}

MonomialBasis monomial_basis(int dim, int max_degree) {
  if (dim < 1 || dim > 2) throw Error(ErrorKind::invalid_argument, "monomial basis dimension must be 1 or 2");
  if (max_degree < 0) throw Error(ErrorKind::invalid_argument, "degree must be non-negative");
  MonomialBasis basis;
  basis.max_degree = max_degree;
  basis.dim = dim;
  for (int deg = 0; deg <= max_degree; ++deg) {
    if (dim == 1) {
      basis.exponents.push_back({deg});
    } else {
      for (int first = deg; first >= 0; --first) basis.exponents.push_back({first, deg - first});
    }
  }
  return basis;
}

cplx weighted_inner_product(const CVector& f, const CVector& g, const RVector& weight_values,
                            const QuadratureRule& quad) {
  if (f.size() != quad.size() || g.size() != quad.size() || weight_values.size() != quad.size())
    throw Error(ErrorKind::grid_mismatch, "inner product arguments must have one value per node");
  const RVector w = weight_values.cwiseProduct(quad.weights);
  return (f.array() * g.conjugate().array() * w.cast<cplx>().array()).sum();
}

HermitianMatrix gram_matrix(const CMatrix& values, const RVector& weight_values,
                            const QuadratureRule& quad) {
  if (values.rows() != quad.size() || weight_values.size() != quad.size())
    throw Error(ErrorKind::grid_mismatch, "Gram samples must have one row per node");
  const RVector w = weight_values.cwiseProduct(quad.weights);
  const CMatrix weighted = w.cast<cplx>().asDiagonal() * values;
  HermitianMatrix g = values.adjoint() * weighted;
  // Exact conjugate symmetry.
  g = 0.5 * (g + g.adjoint()).eval();
  return g;
}

HermitianMatrix gram_matrix(const MonomialBasis& basis, const RVector& weight_values,
                            const QuadratureRule& quad) {
  return gram_matrix(basis.evaluate_rows(quad.nodes), weight_values, quad);
}

Orthonormalization orthonormalize(const HermitianMatrix& gram, const MonomialBasis* basis) {
  const Index m = gram.rows();
  if (gram.cols() != m) throw Error(ErrorKind::invalid_argument, "Gram matrix must be square");
  double max_diag = 0.0;
  for (Index j = 0; j < m; ++j) max_diag = std::max(max_diag, gram(j, j).real());
  if (!(max_diag > 0.0)) throw Error(ErrorKind::degenerate_basis, "Gram matrix has no positive diagonal");

  CMatrix l = CMatrix::Zero(m, m);
  for (Index j = 0; j < m; ++j) {
    double pivot = gram(j, j).real();
    for (Index k = 0; k < j; ++k) pivot -= std::norm(l(j, k));
    if (!(pivot > kPivotThreshold * max_diag)) {
      std::ostringstream os;
      os << "pivot " << pivot << " at index " << j;
      if (basis != nullptr && j < basis->size())
        os << " (monomial " << basis->name(j) << ", degree " << basis->degree(j) << ")";
      os << " is below " << kPivotThreshold << " * max diagonal; quadrature too coarse for the degree?";
      throw Error(ErrorKind::degenerate_basis, os.str());
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Index i = j + 1; i < m; ++i) {
      cplx s = gram(i, j);
      for (Index k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }

  Orthonormalization out;
  out.transform = l.adjoint().triangularView<Eigen::Upper>().solve(CMatrix::Identity(m, m));
  const CMatrix sym = 0.5 * (gram + gram.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(sym, Eigen::EigenvaluesOnly);
  out.condition = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  return out;
}

PolarDifferentiator::PolarDifferentiator(const QuadratureRule& quad)
    : dim_(quad.dim()),
      n_radial_(quad.n_radial),
      n_angular_(quad.n_angular),
      angular_(fourier_diff_matrix(quad.n_angular)),
      axes_(quad.axes) {
  const auto ref = gauss_legendre(n_radial_).first;
  const RMatrix ref_diff = barycentric_diff_matrix(ref);
  for (const PolarAxis& axis : axes_) radial_.push_back(ref_diff * (2.0 / (axis.r_out - axis.r_in)));
}

std::pair<CVector, CVector> PolarDifferentiator::polar_partials(const CVector& f, int coord) const {
  const Index block = static_cast<Index>(n_radial_) * n_angular_;
  Index stride = 1;
  for (int a = coord + 1; a < dim_; ++a) stride *= block;
  const Index outer_count = f.size() / (stride * block);
  if (outer_count * stride * block != f.size())
    throw Error(ErrorKind::grid_mismatch, "sample vector does not match the polar grid");

  CVector fr(f.size()), ft(f.size());
  CMatrix slab(n_radial_, n_angular_);
  const RMatrix& dr = radial_[static_cast<std::size_t>(coord)];
  for (Index outer = 0; outer < outer_count; ++outer) {
    for (Index inner = 0; inner < stride; ++inner) {
      const Index base = outer * stride * block + inner;
      for (int ir = 0; ir < n_radial_; ++ir)
        for (int j = 0; j < n_angular_; ++j) slab(ir, j) = f(base + (static_cast<Index>(ir) * n_angular_ + j) * stride);
      const CMatrix sr = dr.cast<cplx>() * slab;
      const CMatrix st = slab * angular_.transpose().cast<cplx>();
      for (int ir = 0; ir < n_radial_; ++ir)
        for (int j = 0; j < n_angular_; ++j) {
          const Index q = base + (static_cast<Index>(ir) * n_angular_ + j) * stride;
          fr(q) = sr(ir, j);
          ft(q) = st(ir, j);
        }
    }
  }
  return {fr, ft};
}

CVector PolarDifferentiator::dbar(const CVector& f, int coord) const {
  const auto [fr, ft] = polar_partials(f, coord);
  const Index block = static_cast<Index>(n_radial_) * n_angular_;
  Index stride = 1;
  for (int a = coord + 1; a < dim_; ++a) stride *= block;
  const PolarAxis& axis = axes_[static_cast<std::size_t>(coord)];
  CVector out(f.size());
  for (Index q = 0; q < f.size(); ++q) {
    const Index local = (q / stride) % block;
    const double r = axis.radii(local / n_angular_);
    const double th = axis.angles(local % n_angular_);
    out(q) = 0.5 * std::polar(1.0, th) * (fr(q) + cplx(0.0, 1.0) / r * ft(q));
  }
  return out;
}

CVector PolarDifferentiator::d(const CVector& f, int coord) const {
  const auto [fr, ft] = polar_partials(f, coord);
  const Index block = static_cast<Index>(n_radial_) * n_angular_;
  Index stride = 1;
  for (int a = coord + 1; a < dim_; ++a) stride *= block;
  const PolarAxis& axis = axes_[static_cast<std::size_t>(coord)];
  CVector out(f.size());
  for (Index q = 0; q < f.size(); ++q) {
    const Index local = (q / stride) % block;
    const double r = axis.radii(local / n_angular_);
    const double th = axis.angles(local % n_angular_);
    out(q) = 0.5 * std::polar(1.0, -th) * (fr(q) - cplx(0.0, 1.0) / r * ft(q));
  }
  return out;
}

std::vector<char> PolarDifferentiator::interior_mask(int excluded_outer, int excluded_inner) const {
  const Index block = static_cast<Index>(n_radial_) * n_angular_;
  Index total = 1;
  for (int a = 0; a < dim_; ++a) total *= block;
  std::vector<char> mask(static_cast<std::size_t>(total), 1);
  for (Index q = 0; q < total; ++q) {
    Index rest = q;
    for (int a = dim_ - 1; a >= 0; --a) {
      const Index local = rest % block;
      rest /= block;
      const Index ir = local / n_angular_;
      if (ir >= n_radial_ - excluded_outer || ir < excluded_inner) mask[static_cast<std::size_t>(q)] = 0;
    }
  }
  return mask;
}

}  // namespace bergman_lab
