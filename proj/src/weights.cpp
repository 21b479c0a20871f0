#include "bergman_lab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "bergman_lab/finite_difference.hpp"
#include "bergman_lab/parallel.hpp"

namespace bergman_lab {

const char* to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::quadratic_hermitian: return "quadratic_hermitian";
    case WeightKind::polynomial_psh: return "polynomial_psh";
    case WeightKind::custom: return "custom";
  }
  return "?";
}

HermitianMatrix ComplexHessian::assembled() const {
  const int nn = n(), dd = d();
  HermitianMatrix full(nn + dd, nn + dd);
  full.topLeftCorner(nn, nn) = tt;
  full.topRightCorner(nn, dd) = tf;
  full.bottomLeftCorner(dd, nn) = tf.adjoint();
  full.bottomRightCorner(dd, dd) = ff;
  return full;
}

ComplexHessian ComplexHessian::split(const HermitianMatrix& full, int n) {
  const int dd = static_cast<int>(full.rows()) - n;
  ComplexHessian h;
  h.tt = full.topLeftCorner(n, n);
  h.tf = full.topRightCorner(n, dd);
  h.ff = full.bottomRightCorner(dd, dd);
  return h;
}

struct WeightFamily::Impl {
  WeightKind kind = WeightKind::quadratic_hermitian;
  HermitianMatrix h;
  Polynomial poly;
  std::vector<Polynomial> grad;                // d/dx_a
  std::vector<std::vector<Polynomial>> mixed;  // d/dx_a d/dconj(x_b)
  Expression expr;
};

WeightFamily WeightFamily::quadratic(const HermitianMatrix& h, int base_dim, int fiber_dim) {
  if (base_dim < 1 || fiber_dim < 1) throw Error(ErrorKind::invalid_argument, "weight dimensions must be >= 1");
  if (h.rows() != base_dim + fiber_dim || h.cols() != base_dim + fiber_dim)
    throw Error(ErrorKind::invalid_argument, "quadratic weight matrix must have size n + d");
  if (!is_hermitian(h)) throw Error(ErrorKind::not_a_weight, "quadratic weight matrix is not Hermitian");
  auto impl = std::make_shared<Impl>();
  impl->kind = WeightKind::quadratic_hermitian;
  impl->h = 0.5 * (h + h.adjoint());
  WeightFamily w;
  w.n_ = base_dim;
  w.d_ = fiber_dim;
  w.twisted_h_ = impl->h;
  w.impl_ = std::move(impl);
  return w;
}

WeightFamily WeightFamily::polynomial(const Polynomial& p, int base_dim, int fiber_dim) {
  if (base_dim < 1 || fiber_dim < 1) throw Error(ErrorKind::invalid_argument, "weight dimensions must be >= 1");
  if (p.nvars() != base_dim + fiber_dim)
    throw Error(ErrorKind::invalid_argument, "polynomial variable count must be n + d");
  if (!p.is_real()) throw Error(ErrorKind::not_a_weight, "polynomial weight is not real-valued");
  auto impl = std::make_shared<Impl>();
  impl->kind = WeightKind::polynomial_psh;
  impl->poly = p;
  const int v = base_dim + fiber_dim;
  impl->mixed.resize(static_cast<std::size_t>(v));
  for (int a = 0; a < v; ++a) {
    impl->grad.push_back(p.d(a));
    for (int b = 0; b < v; ++b) impl->mixed[static_cast<std::size_t>(a)].push_back(p.d(a).dbar(b));
  }
  WeightFamily w;
  w.n_ = base_dim;
  w.d_ = fiber_dim;
  w.impl_ = std::move(impl);
  return w;
}

WeightFamily WeightFamily::custom(const Expression& e, int base_dim, int fiber_dim) {
  if (base_dim < 1 || fiber_dim < 1) throw Error(ErrorKind::invalid_argument, "weight dimensions must be >= 1");
  if (e.empty()) throw Error(ErrorKind::invalid_argument, "custom weight needs an expression");
  auto impl = std::make_shared<Impl>();
  impl->kind = WeightKind::custom;
  impl->expr = e;
  WeightFamily w;
  w.n_ = base_dim;
  w.d_ = fiber_dim;
  w.impl_ = std::move(impl);
  return w;
}

WeightKind WeightFamily::kind() const {
  if (!impl_) throw Error(ErrorKind::invalid_argument, "empty weight family");
  return impl_->kind;
}

CVector WeightFamily::join(const BasePoint& t, const FiberPoint& xi) const {
  if (!impl_) throw Error(ErrorKind::invalid_argument, "empty weight family");
  if (t.size() != n_ || xi.size() != d_) throw Error(ErrorKind::invalid_argument, "point dimension mismatch");
  CVector x(n_ + d_);
  x << t, xi;
  return x;
}

cplx WeightFamily::raw_value(const CVector& x) const {
  switch (impl_->kind) {
    case WeightKind::quadratic_hermitian: return x.transpose() * impl_->h * x.conjugate();
    case WeightKind::polynomial_psh: return impl_->poly.evaluate(x);
    case WeightKind::custom: return impl_->expr.evaluate(x);
  }
  return 0.0;
}

double WeightFamily::value(const BasePoint& t, const FiberPoint& xi) const {
  const cplx v = raw_value(join(t, xi));
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    std::ostringstream os;
    os << "weight is not finite at t = " << t.transpose() << ", xi = " << xi.transpose();
    throw Error(ErrorKind::not_a_weight, os.str());
  }
  if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v))) {
    std::ostringstream os;
    os << "imaginary part " << v.imag() << " at t = " << t.transpose() << ", xi = " << xi.transpose();
    throw Error(ErrorKind::not_a_weight, os.str());
  }
  return v.real() + twist_ * t.squaredNorm();
}

cplx WeightFamily::d_base(const BasePoint& t, const FiberPoint& xi, int alpha) const {
  const CVector x = join(t, xi);
  if (alpha < 0 || alpha >= n_) throw Error(ErrorKind::invalid_argument, "base direction out of range");
  cplx g = 0.0;
  switch (impl_->kind) {
    case WeightKind::quadratic_hermitian:
      g = (impl_->h.row(alpha) * x.conjugate())(0);
      break;
    case WeightKind::polynomial_psh:
      g = impl_->grad[static_cast<std::size_t>(alpha)].evaluate(x);
      break;
    case WeightKind::custom: {
      const double h = kCustomStep;
      const cplx I(0.0, 1.0);
      auto f = [&](const CVector& y) { return raw_value(y).real(); };
      const CVector e = CVector::Unit(n_ + d_, alpha);
      const double dx = (f(x + h * e) - f(x - h * e)) / (2.0 * h);
      const double dy = (f(x + I * h * e) - f(x - I * h * e)) / (2.0 * h);
      g = 0.5 * cplx(dx, -dy);
      break;
    }
  }
  return g + twist_ * std::conj(t(alpha));
}

ComplexHessian WeightFamily::hessian(const BasePoint& t, const FiberPoint& xi) const {
  const CVector x = join(t, xi);
  const int v = n_ + d_;
  HermitianMatrix full(v, v);
  switch (impl_->kind) {
    case WeightKind::quadratic_hermitian:
      full = impl_->h;
      break;
    case WeightKind::polynomial_psh:
      for (int a = 0; a < v; ++a)
        for (int b = 0; b < v; ++b)
          full(a, b) = impl_->mixed[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].evaluate(x);
      full = (0.5 * (full + full.adjoint())).eval();
      break;
    case WeightKind::custom:
      full = polarized_hessian([&](const CVector& y) { return raw_value(y).real(); }, x, kCustomStep);
      break;
  }
  ComplexHessian h = ComplexHessian::split(full, n_);
  h.tt += twist_ * HermitianMatrix::Identity(n_, n_);
  return h;
}

WeightFamily WeightFamily::twisted(double c) const {
  if (c < 0.0) throw Error(ErrorKind::invalid_argument, "twist constant must be >= 0");
  WeightFamily w = *this;
  w.twist_ += c;
  if (impl_ && impl_->kind == WeightKind::quadratic_hermitian) {
    w.twisted_h_ = impl_->h;
    w.twisted_h_.topLeftCorner(n_, n_) += w.twist_ * HermitianMatrix::Identity(n_, n_);
  }
  return w;
}

const HermitianMatrix* WeightFamily::constant_hessian() const {
  if (!impl_ || impl_->kind != WeightKind::quadratic_hermitian) return nullptr;
  return &twisted_h_;
}

std::string WeightFamily::describe() const {
  std::ostringstream os;
  if (!impl_) return "empty";
  os << to_string(impl_->kind) << " n=" << n_ << " d=" << d_;
  switch (impl_->kind) {
    case WeightKind::quadratic_hermitian: {
      Eigen::IOFormat fmt(Eigen::FullPrecision, Eigen::DontAlignCols, ",", ";", "", "", "[", "]");
      os << " H=" << impl_->h.format(fmt);
      break;
    }
    case WeightKind::polynomial_psh: os << " phi=" << impl_->poly.to_string(n_); break;
    case WeightKind::custom: os << " phi=" << impl_->expr.source(); break;
  }
  if (twist_ != 0.0) os << " + " << twist_ << "|t|^2";
  return os.str();
}

ComplexHessian hessian_at(const WeightFamily& w, const BasePoint& t, const FiberPoint& xi) {
  (void)w.value(t, xi);  // realness check
  return w.hessian(t, xi);
}

double schur_trace(const ComplexHessian& h) {
  Eigen::LLT<CMatrix> llt(0.5 * (h.ff + h.ff.adjoint()));
  if (llt.info() != Eigen::Success || min_eigenvalue(h.ff) <= 0.0)
    throw Error(ErrorKind::fiber_degenerate, "fiber block is not positive definite");
  const CMatrix solved = llt.solve(h.tf.adjoint());
  const CMatrix schur = h.tt - h.tf * solved;
  return schur.trace().real();
}

namespace {

struct SignedPermutation {
  std::vector<int> p;
  int sign;
};

std::vector<SignedPermutation> permutations(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) p[static_cast<std::size_t>(j)] = j;
  std::vector<SignedPermutation> out;
  do {
    int inversions = 0;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (p[static_cast<std::size_t>(a)] > p[static_cast<std::size_t>(b)]) ++inversions;
    out.push_back({p, inversions % 2 == 0 ? 1 : -1});
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace

double wedge_top_coefficient(const std::vector<HermitianMatrix>& forms) {
  const int n = static_cast<int>(forms.size());
  if (n == 0) return 1.0;
  if (n > 6) throw Error(ErrorKind::invalid_argument, "exterior expansion limited to dimension 6");
  for (const auto& m : forms)
    if (m.rows() != n || m.cols() != n) throw Error(ErrorKind::invalid_argument, "form size must equal the form count");
  const auto perms = permutations(n);
  cplx total = 0.0;
  for (const auto& s : perms) {
    for (const auto& t : perms) {
      cplx prod = static_cast<double>(s.sign * t.sign);
      for (int i = 0; i < n; ++i)
        prod *= forms[static_cast<std::size_t>(i)](s.p[static_cast<std::size_t>(i)], t.p[static_cast<std::size_t>(i)]);
      total += prod;
    }
  }
  return total.real();
}

double ma_ratio(const ComplexHessian& h, int n, int d) {
  if (h.n() != n || h.d() != d) throw Error(ErrorKind::invalid_argument, "Hessian block sizes do not match (n, d)");
  if (min_eigenvalue(h.ff) <= 0.0) throw Error(ErrorKind::fiber_degenerate, "fiber block is not positive definite");
  const HermitianMatrix full = h.assembled();
  HermitianMatrix base = HermitianMatrix::Zero(n + d, n + d);
  base.topLeftCorner(n, n) = HermitianMatrix::Identity(n, n);

  std::vector<HermitianMatrix> num(static_cast<std::size_t>(d + 1), full);
  num.insert(num.end(), static_cast<std::size_t>(n - 1), base);
  std::vector<HermitianMatrix> den(static_cast<std::size_t>(d), full);
  den.insert(den.end(), static_cast<std::size_t>(n), base);

  const double denominator = wedge_top_coefficient(den);
  if (!(denominator > 0.0)) throw Error(ErrorKind::fiber_degenerate, "fiber volume form vanishes");
  return static_cast<double>(n) / (d + 1) * wedge_top_coefficient(num) / denominator;
}

double trace_quadratic_form(const ComplexHessian& h, const CMatrix& lambda) {
  if (lambda.rows() != h.n() || lambda.cols() != h.d())
    throw Error(ErrorKind::invalid_argument, "lambda must be n x d");
  if ((h.ff - HermitianMatrix::Identity(h.d(), h.d())).norm() > 1e-12)
    throw Error(ErrorKind::invalid_argument, "quadratic form requires an identity fiber block");
  const double cross = (h.tf.array() * lambda.conjugate().array()).sum().real();
  return h.tt.trace().real() - 2.0 * cross + lambda.squaredNorm();
}

ComplexHessian normalize_fiber_block(const ComplexHessian& h) {
  Eigen::LLT<CMatrix> llt(0.5 * (h.ff + h.ff.adjoint()));
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::fiber_degenerate, "fiber block is not positive definite");
  const CMatrix l = llt.matrixL();
  ComplexHessian out;
  out.tt = h.tt;
  // tf * L^{-H}: solve L X^T... via (L^{-1} tf^H)^H.
  out.tf = l.triangularView<Eigen::Lower>().solve(h.tf.adjoint()).adjoint();
  out.ff = HermitianMatrix::Identity(h.d(), h.d());
  return out;
}

bool BasePatch::contains(const BasePoint& t, double slack) const {
  if (t.size() != center.size()) return false;
  return (t - center).norm() <= radius * (1.0 + slack);
}

SamplingGrid make_sampling_grid(const BasePatch& patch, const FiberDomain& fiber, int base_rings, int angles,
                                int fiber_rings) {
  if (base_rings < 0 || angles < 1 || fiber_rings < 1)
    throw Error(ErrorKind::invalid_argument, "sampling grid needs rings >= 0 (base), >= 1 (fiber), angles >= 1");
  fiber.validate();
  const double two_pi = 2.0 * std::numbers::pi;
  const int n = patch.dim();

  std::vector<cplx> base_offsets{0.0};
  for (int k = 1; k <= base_rings; ++k) {
    const double rho = patch.radius * k / base_rings / std::sqrt(static_cast<double>(n));
    for (int j = 0; j < angles; ++j) base_offsets.push_back(std::polar(rho, two_pi * j / angles));
  }

  SamplingGrid grid;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (;;) {
    BasePoint t = patch.center;
    for (int a = 0; a < n; ++a) t(a) += base_offsets[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
    grid.base_points.push_back(t);
    int a = 0;
    while (a < n && ++idx[static_cast<std::size_t>(a)] == static_cast<int>(base_offsets.size())) idx[static_cast<std::size_t>(a++)] = 0;
    if (a == n) break;
  }

  std::vector<std::vector<cplx>> fiber_values(static_cast<std::size_t>(fiber.dim()));
  for (int c = 0; c < fiber.dim(); ++c) {
    auto& vals = fiber_values[static_cast<std::size_t>(c)];
    const double ro = fiber.outer[static_cast<std::size_t>(c)];
    const double ri = fiber.inner_radius(c);
    if (fiber.kind != DomainKind::annulus) vals.push_back(0.0);
    for (int k = 1; k <= fiber_rings; ++k) {
      const double rho = fiber.kind == DomainKind::annulus ? ri + (ro - ri) * (k - 0.5) / fiber_rings
                                                           : 0.999 * ro * k / fiber_rings;
      for (int j = 0; j < angles; ++j) vals.push_back(std::polar(rho, two_pi * (j + 0.5 * (k % 2)) / angles));
    }
  }
  std::vector<int> fidx(static_cast<std::size_t>(fiber.dim()), 0);
  for (;;) {
    FiberPoint xi(fiber.dim());
    for (int c = 0; c < fiber.dim(); ++c)
      xi(c) = fiber_values[static_cast<std::size_t>(c)][static_cast<std::size_t>(fidx[static_cast<std::size_t>(c)])];
    grid.fiber_points.push_back(xi);
    int c = 0;
    while (c < fiber.dim() &&
           ++fidx[static_cast<std::size_t>(c)] == static_cast<int>(fiber_values[static_cast<std::size_t>(c)].size()))
      fidx[static_cast<std::size_t>(c++)] = 0;
    if (c == fiber.dim()) break;
  }

  std::ostringstream os;
  os << grid.base_points.size() << " base points (" << base_rings << " rings x " << angles
     << " angles per coordinate, radius " << patch.radius << ") x " << grid.fiber_points.size()
     << " fiber points (" << fiber_rings << " rings)";
  grid.description = os.str();
  return grid;
}

WeightCertificate certify(const WeightFamily& w, const SamplingGrid& grid, int threads, double tolerance) {
  struct Slot {
    double min_full = std::numeric_limits<double>::infinity();
    double min_tt = std::numeric_limits<double>::infinity();
    double min_ff = std::numeric_limits<double>::infinity();
    double min_schur = std::numeric_limits<double>::infinity();
    double scale = 0.0;
    bool ff_ok = true;
    std::string diagnostic;
  };
  std::vector<Slot> slots(grid.base_points.size());
  parallel_for(grid.base_points.size(), threads, [&](std::size_t i) {
    Slot& s = slots[i];
    const BasePoint& t = grid.base_points[i];
    for (const FiberPoint& xi : grid.fiber_points) {
      ComplexHessian h;
      try {
        h = hessian_at(w, t, xi);
      } catch (const Error& e) {
        s.ff_ok = false;
        if (s.diagnostic.empty()) s.diagnostic = e.what();
        continue;
      }
      const HermitianMatrix full = h.assembled();
      s.scale = std::max(s.scale, full.norm());
      s.min_full = std::min(s.min_full, min_eigenvalue(full));
      s.min_tt = std::min(s.min_tt, min_eigenvalue(h.tt));
      const double ffe = min_eigenvalue(h.ff);
      s.min_ff = std::min(s.min_ff, ffe);
      if (ffe <= 0.0) {
        s.ff_ok = false;
        if (s.diagnostic.empty()) {
          std::ostringstream os;
          os << "fiber block not positive definite at t = " << t.transpose() << ", xi = " << xi.transpose();
          s.diagnostic = os.str();
        }
        continue;
      }
      s.min_schur = std::min(s.min_schur, schur_trace(h));
    }
  });

  WeightCertificate cert;
  cert.grid_spec = grid.description;
  cert.samples = static_cast<Index>(grid.base_points.size() * grid.fiber_points.size());
  double min_full = std::numeric_limits<double>::infinity();
  double min_tt = min_full, min_ff = min_full, min_schur = min_full, scale = 0.0;
  for (const Slot& s : slots) {
    min_full = std::min(min_full, s.min_full);
    min_tt = std::min(min_tt, s.min_tt);
    min_ff = std::min(min_ff, s.min_ff);
    min_schur = std::min(min_schur, s.min_schur);
    scale = std::max(scale, s.scale);
    cert.fiber_positive = cert.fiber_positive && s.ff_ok;
    if (!s.diagnostic.empty()) cert.diagnostics.push_back(s.diagnostic);
  }
  if (cert.samples == 0) {
    cert.fiber_positive = false;
    cert.diagnostics.push_back("empty sampling grid");
    return cert;
  }
  cert.psh_min_eig = min_full;
  cert.min_fiber_eig = min_ff;
  cert.min_schur_trace = std::isfinite(min_schur) ? min_schur : 0.0;
  cert.C = std::isfinite(min_tt) ? std::max(0.0, -min_tt) : 0.0;
  const bool psh = min_full >= -tolerance * std::max(1.0, scale);
  if (!psh) {
    std::ostringstream os;
    os << "assembled Hessian not psd: min eigenvalue " << min_full;
    cert.diagnostics.push_back(os.str());
  }
  if (cert.fiber_positive && psh)
    cert.eps0 = std::max(0.0, min_schur / w.base_dim());
  return cert;
}

WeightFamily twist_weight(const WeightFamily& w, double c) { return w.twisted(c); }

double distortion_margin(int n, double delta, double eps0) {
  if (n < 1) throw Error(ErrorKind::invalid_argument, "base dimension must be >= 1");
  if (!(delta >= 0.0) || delta >= 1.0) throw Error(ErrorKind::invalid_argument, "delta must lie in [0, 1)");
  return eps0 * std::pow(1.0 - delta, 2 * n - 2) / std::pow(1.0 + delta, 2 * n);
}

}  // namespace bergman_lab
