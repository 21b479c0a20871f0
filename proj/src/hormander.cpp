#include "bergman_lab/hormander.hpp"

#include <algorithm>
#include <cmath>

#include "bergman_lab/parallel.hpp"

namespace bergman_lab {

namespace {

// Node values of sum_i conj(a_i) K_t(., s_i(t)) with the amplitudes taken at t0.
CVector representer(const BergmanBasis& b, const SectionFamily& fam, const BasePoint& t0) {
  CVector v = CVector::Zero(b.size());
  for (int i = 0; i < fam.size(); ++i) v += fam.amplitude(i, t0) * b.frame(fam.section(i, b.t));
  return b.frame_on_nodes() * v.conjugate();
}

RVector measure(const HormanderData& d) {
  return d.basis.weight_values.cwiseProduct(d.basis.space->quad.weights);
}

double weighted_norm(const CVector& f, const RVector& m) {
  return std::sqrt((f.cwiseAbs2().array() * m.array()).sum());
}

}  // namespace

CVector gamma_field(const BergmanBasis& b, const SectionFamily& fam) { return representer(b, fam, b.t); }

CVector gamma_field(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0,
                    std::shared_ptr<const FiberSpace> space) {
  return gamma_field(bergman_basis(w, t0, std::move(space)), fam);
}

CVector lambda_field(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0, int alpha,
                     std::shared_ptr<const FiberSpace> space, double h, bool weight_term, int threads) {
  const int n = w.base_dim();
  if (alpha < 0 || alpha >= n) throw Error(ErrorKind::invalid_argument, "base direction out of range");
  const cplx I(0.0, 1.0);
  const CVector e = CVector::Unit(n, alpha);
  // Order: +-h, +-2h, +-3h along Re t_alpha, then the same along Im t_alpha.
  std::vector<cplx> shifts;
  for (const cplx dir : {cplx(1.0), I})
    for (int k = 1; k <= 3; ++k) {
      shifts.push_back(dir * (k * h));
      shifts.push_back(-dir * (k * h));
    }
  std::vector<CVector> values(shifts.size());
  parallel_for(shifts.size(), threads, [&](std::size_t j) {
    const BasePoint t = t0 + shifts[j] * e;
    const BergmanBasis b = bergman_basis(w, t, space);
    const ConvergenceDiagnostic c = kernel_convergence(b, section_points(fam, t));
    if (!c.converged)
      throw Error(ErrorKind::unconverged, "kernel unconverged at a Lambda stencil point (relative change " +
                                              std::to_string(c.relative_change) + ")");
    values[j] = representer(b, fam, t0);
  });
  // Sixth-order central difference (two Richardson steps).
  auto central = [&](std::size_t base) -> CVector {
    return (45.0 * (values[base] - values[base + 1]) - 9.0 * (values[base + 2] - values[base + 3]) +
            (values[base + 4] - values[base + 5])) /
           (60.0 * h);
  };
  const CVector dx = central(0);
  const CVector dy = central(6);
  CVector out = 0.5 * (dx - I * dy);
  if (weight_term) {
    const BergmanBasis b0 = bergman_basis(w, t0, space);
    const CVector g = gamma_field(b0, fam);
    const QuadratureRule& quad = space->quad;
    for (Index q = 0; q < quad.size(); ++q) out(q) -= w.d_base(t0, quad.node(q), alpha) * g(q);
  }
  return out;
}

HormanderData hormander_data(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0,
                             std::shared_ptr<const FiberSpace> space, double h, int threads) {
  HormanderData d;
  d.t0 = t0;
  d.basis = bergman_basis(w, t0, space);
  const ConvergenceDiagnostic c = kernel_convergence(d.basis, section_points(fam, t0));
  if (!c.converged)
    throw Error(ErrorKind::unconverged,
                "kernel unconverged at t0 (relative change " + std::to_string(c.relative_change) + ")");
  d.gamma = gamma_field(d.basis, fam);
  const QuadratureRule& quad = space->quad;
  const int n = w.base_dim();
  d.hessians.resize(static_cast<std::size_t>(quad.size()));
  parallel_for(d.hessians.size(), threads,
               [&](std::size_t q) { d.hessians[q] = w.hessian(t0, quad.node(static_cast<Index>(q))); });
  d.lambda_raw.resize(quad.size(), n);
  d.lambda.resize(quad.size(), n);
  for (int a = 0; a < n; ++a) {
    d.lambda_raw.col(a) = lambda_field(w, fam, t0, a, space, h, false, threads);
    for (Index q = 0; q < quad.size(); ++q)
      d.lambda(q, a) = d.lambda_raw(q, a) - w.d_base(t0, quad.node(q), a) * d.gamma(q);
  }
  return d;
}

HormanderCheck orthogonality_residual(const HormanderData& data, bool use_raw) {
  HormanderCheck out;
  out.name = use_raw ? "orthogonality (without weight term)" : "orthogonality";
  out.limit = kOrthogonalityLimit;
  const RVector m = measure(data);
  const CMatrix frame = data.basis.frame_on_nodes();
  const double gamma_norm = weighted_norm(data.gamma, m);
  const CMatrix& lam = use_raw ? data.lambda_raw : data.lambda;
  for (int a = 0; a < data.n(); ++a) {
    const CVector weighted = lam.col(a).conjugate().cwiseProduct(m.cast<cplx>());
    const double residual = (frame.transpose() * weighted).cwiseAbs().maxCoeff();
    const double norm = weighted_norm(lam.col(a), m);
    const double scale = std::max(norm, 1e-4 * gamma_norm);
    out.value.push_back(residual);
    out.scale.push_back(scale);
    out.ratio.push_back(scale > 0.0 ? residual / scale : 0.0);
    out.extras["lambda_norm_" + std::to_string(a + 1)] = norm;
  }
  out.worst = out.ratio.empty() ? 0.0 : *std::max_element(out.ratio.begin(), out.ratio.end());
  out.pass = out.worst < out.limit;
  return out;
}

HormanderCheck dbar_identity_residual(const HormanderData& data, const WeightFamily& /*w*/, bool use_raw) {
  HormanderCheck out;
  out.name = use_raw ? "dbar identity (without weight term)" : "dbar identity";
  out.limit = kDbarLimit;
  const FiberSpace& space = *data.basis.space;
  const RVector m = measure(data);
  const std::vector<char> mask = space.diff.interior_mask(2);
  const double gamma_norm = weighted_norm(data.gamma, m);
  const CMatrix& lam = use_raw ? data.lambda_raw : data.lambda;
  const int d = space.domain.dim();
  for (int a = 0; a < data.n(); ++a) {
    double sq = 0.0;
    double max_mixed = 0.0;
    for (int k = 0; k < d; ++k) {
      const CVector dbar = space.diff.dbar(lam.col(a), k);
      for (Index q = 0; q < dbar.size(); ++q) {
        const cplx mixed = data.hessians[static_cast<std::size_t>(q)].tf(a, k);
        max_mixed = std::max(max_mixed, std::abs(mixed));
        if (!mask[static_cast<std::size_t>(q)]) continue;
        sq += std::norm(dbar(q) + data.gamma(q) * mixed) * m(q);
      }
    }
    const double residual = std::sqrt(sq);
    const double scale = gamma_norm * (max_mixed > 0.0 ? max_mixed : 1.0);
    out.value.push_back(residual);
    out.scale.push_back(scale);
    out.ratio.push_back(scale > 0.0 ? residual / scale : 0.0);
  }
  out.worst = out.ratio.empty() ? 0.0 : *std::max_element(out.ratio.begin(), out.ratio.end());
  out.pass = out.worst < out.limit;
  return out;
}

HormanderCheck hormander_bound_check(const HormanderData& data, const WeightFamily& /*w*/) {
  HormanderCheck out;
  out.name = "hormander bound";
  out.limit = 1.0 + kHormanderSlack;
  const RVector m = measure(data);
  const double b = data.gamma.cwiseAbs2().dot(m);
  for (int a = 0; a < data.n(); ++a) {
    const double lhs = data.lambda.col(a).cwiseAbs2().dot(m);
    double rhs = 0.0;
    for (Index q = 0; q < m.size(); ++q) {
      const ComplexHessian& h = data.hessians[static_cast<std::size_t>(q)];
      Eigen::LLT<CMatrix> llt(h.ff);
      if (llt.info() != Eigen::Success || min_eigenvalue(h.ff) <= 0.0)
        throw Error(ErrorKind::fiber_degenerate, "fiber block not positive definite at a quadrature node");
      const CVector row = h.tf.row(a).transpose();
      const double contracted = row.dot(llt.solve(row)).real();
      rhs += std::norm(data.gamma(q)) * contracted * m(q);
    }
    out.value.push_back(lhs);
    out.scale.push_back(rhs);
    out.ratio.push_back(rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0));
    const bool ok = lhs <= rhs * (1.0 + kHormanderSlack) + 1e-10 * b;
    out.pass = out.pass && ok;
  }
  out.worst = 0.0;
  for (std::size_t a = 0; a < out.ratio.size(); ++a)
    if (out.scale[a] > 0.0) out.worst = std::max(out.worst, out.ratio[a]);
  out.extras["section_value"] = b;
  return out;
}

AssembledBound assembled_lower_bound(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0,
                                     double eps0, const CheckConfig& cfg, const HormanderData* data) {
  HormanderData local;
  if (data == nullptr) {
    local = hormander_data(w, fam, t0, cfg.space, cfg.h, cfg.threads);
    data = &local;
  }
  AssembledBound out;
  const FieldHessian fh = field_hessian(section_field(w, fam, cfg.space), t0, cfg);
  out.lhs = fh.hessian.trace().real();
  const RVector m = measure(*data);
  out.section_value = data->gamma.cwiseAbs2().dot(m);
  for (Index q = 0; q < m.size(); ++q) {
    const ComplexHessian& h = data->hessians[static_cast<std::size_t>(q)];
    const double g2 = std::norm(data->gamma(q));
    out.rhs += g2 * schur_trace(h) * m(q);
    double inner = h.tt.trace().real() * g2;
    for (int a = 0; a < data->n(); ++a) inner -= std::norm(data->lambda(q, a));
    out.intermediate += inner * m(q);
  }
  out.bound = w.base_dim() * eps0 * out.section_value;
  out.tolerance = cfg.tolerance * std::max(1.0, out.section_value);
  out.chain_margin = out.lhs - out.rhs;
  out.bound_margin = out.rhs - out.bound;
  out.pass = out.chain_margin >= -out.tolerance && out.bound_margin >= -out.tolerance;
  return out;
}

}  // namespace bergman_lab
