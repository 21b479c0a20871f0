#include "bergman_lab/iteration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bergman_lab/finite_difference.hpp"
#include "bergman_lab/parallel.hpp"

namespace bergman_lab {

SampledWeight sample_weight(const WeightFamily& w, const std::vector<BasePoint>& points, const QuadratureRule& quad,
                            const std::string& id, int threads) {
  SampledWeight out;
  out.id = id;
  out.points = points;
  out.values.resize(quad.size(), static_cast<Index>(points.size()));
  parallel_for(points.size(), threads, [&](std::size_t j) {
    for (Index q = 0; q < quad.size(); ++q) out.values(q, static_cast<Index>(j)) = w.value(points[j], quad.node(q));
  });
  return out;
}

SampledWeight flat_weight(const std::vector<BasePoint>& points, Index nodes, const std::string& id) {
  SampledWeight out;
  out.id = id;
  out.points = points;
  out.values = RMatrix::Zero(nodes, static_cast<Index>(points.size()));
  return out;
}

SampledWeight mix_weights(const SampledWeight& phi_b, const SampledWeight& phi_l, int m) {
  if (m < 2) throw Error(ErrorKind::invalid_argument, "m must be >= 2");
  if (phi_b.values.rows() != phi_l.values.rows() || phi_b.values.cols() != phi_l.values.cols() ||
      phi_b.points.size() != phi_l.points.size())
    throw Error(ErrorKind::grid_mismatch, "mixed weights must share the patch x fiber grid");
  for (std::size_t j = 0; j < phi_b.points.size(); ++j)
    if ((phi_b.points[j] - phi_l.points[j]).norm() != 0.0)
      throw Error(ErrorKind::grid_mismatch, "mixed weights are sampled at different base points");
  SampledWeight out;
  out.id = "mix(" + phi_b.id + ", " + phi_l.id + ")";
  out.points = phi_b.points;
  const double inv = 1.0 / m;
  out.values = (1.0 - inv) * phi_b.values + inv * phi_l.values;
  return out;
}

SampledWeight bergman_weight(const SampledWeight& w, std::shared_ptr<const FiberSpace> space,
                             const std::vector<Index>& check_nodes, double* worst_change, int threads) {
  if (w.values.rows() != space->quad.size()) throw Error(ErrorKind::grid_mismatch, "weight samples do not match the fiber nodes");
  SampledWeight out;
  out.id = "bergman(" + w.id + ")";
  out.points = w.points;
  out.values.resize(w.values.rows(), w.values.cols());
  std::vector<double> change(w.points.size(), 0.0);
  const int lower = std::max(0, space->degree() - 2);
  const Index m_lower = space->basis.size_up_to(lower);
  parallel_for(w.points.size(), threads, [&](std::size_t j) {
    const RVector ev = (-w.values.col(static_cast<Index>(j))).array().exp();
    const BergmanBasis b = bergman_basis_from_values(w.points[j], ev, space, w.id);
    const CMatrix frame = b.frame_on_nodes();
    for (Index q = 0; q < frame.rows(); ++q) {
      const double k = frame.row(q).squaredNorm();
      if (!(k > 0.0)) throw Error(ErrorKind::non_finite, "kernel diagonal vanished at a node");
      out.values(q, static_cast<Index>(j)) = std::log(k);
    }
    double worst = 0.0;
    for (Index q : check_nodes) {
      const double kn = frame.row(q).squaredNorm();
      const double km = frame.row(q).head(m_lower).squaredNorm();
      worst = std::max(worst, (kn - km) / kn);
    }
    change[j] = worst;
  });
  if (worst_change != nullptr) *worst_change = change.empty() ? 0.0 : *std::max_element(change.begin(), change.end());
  return out;
}

std::vector<Index> measurement_nodes(const FiberSpace& space, double fraction) {
  const QuadratureRule& quad = space.quad;
  std::vector<Index> out;
  for (Index q = 0; q < quad.size(); ++q) {
    bool keep = true;
    for (int a = 0; a < quad.dim(); ++a) {
      const PolarAxis& ax = quad.axes[static_cast<std::size_t>(a)];
      const double r = std::abs(quad.nodes(q, a));
      if (r > ax.r_in + fraction * (ax.r_out - ax.r_in)) keep = false;
      if (ax.r_in > 0.0 && r < ax.r_out - fraction * (ax.r_out - ax.r_in)) keep = false;
    }
    if (keep) out.push_back(q);
  }
  return out;
}

double ledger_bound(int m, int k, double eps0) {
  // Neumaier summation of (1/m) (1 - 1/m)^i.
  const double r = 1.0 - 1.0 / m;
  double sum = 0.0, comp = 0.0, term = 1.0 / m;
  for (int i = 0; i < k; ++i) {
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) comp += (sum - t) + term;
    else comp += (term - t) + sum;
    sum = t;
    term *= r;
  }
  return (sum + comp) * eps0;
}

double ledger_bound_closed(int m, int k, double eps0) {
  return (1.0 - std::pow(1.0 - 1.0 / m, k)) * eps0;
}

bool IterationLedger::pass() const {
  if (aborted) return false;
  return std::all_of(steps.begin(), steps.end(), [](const IterationStep& s) { return s.pass; });
}

namespace {

struct PointLayout {
  Stencil st_h;
  Stencil st_h2;
  Index offset_h = 0;
  Index offset_h2 = 0;
};

}  // namespace

IterationLedger run_iteration(const WeightFamily& phi_l, int m, int steps, const IterationConfig& cfg) {
  if (m < 2) throw Error(ErrorKind::invalid_argument, "m must be >= 2");
  if (steps < 0 || steps > 12) throw Error(ErrorKind::invalid_argument, "iteration steps must lie in [0, 12]");
  if (!(cfg.eps0 > 0.0)) throw Error(ErrorKind::invalid_argument, "iteration needs a certified eps0 > 0");
  const auto& space = cfg.check.space;
  const int n = phi_l.base_dim();
  const int threads = cfg.check.threads;

  IterationLedger ledger;
  ledger.m = m;
  ledger.n = n;
  ledger.eps0 = cfg.eps0;
  ledger.target = cfg.eps0;
  ledger.twist = cfg.twist;
  ledger.tolerance = cfg.check.tolerance;
  ledger.start = cfg.start == IterationStart::flat ? "flat" : "bergman";
  if (steps == 0) return ledger;

  // All stencil points of all base points, sampled independently.
  std::vector<PointLayout> layout;
  std::vector<BasePoint> points;
  for (const BasePoint& t0 : cfg.base_points) {
    PointLayout pl;
    pl.st_h = make_stencil(t0, cfg.check.h, &cfg.check.patch);
    pl.st_h2 = make_stencil(t0, 0.5 * cfg.check.h, &cfg.check.patch);
    pl.offset_h = static_cast<Index>(points.size());
    points.insert(points.end(), pl.st_h.points.begin(), pl.st_h.points.end());
    pl.offset_h2 = static_cast<Index>(points.size());
    points.insert(points.end(), pl.st_h2.points.begin(), pl.st_h2.points.end());
    layout.push_back(std::move(pl));
  }
  const std::vector<Index> nodes = measurement_nodes(*space, cfg.node_fraction);
  const Index per = static_cast<Index>(layout.empty() ? 0 : layout.front().st_h.points.size());

  try {
    const SampledWeight phi_samples = sample_weight(phi_l, points, space->quad, "phi_L", threads);
    SampledWeight phi_b = cfg.start == IterationStart::flat
                              ? flat_weight(points, space->quad.size())
                              : bergman_weight(phi_samples, space, nodes, nullptr, threads);

    for (int k = 1; k <= steps; ++k) {
      IterationStep step;
      step.k = k;
      step.weight_id = "phi_B," + std::to_string(k);
      SampledWeight mixed = mix_weights(phi_b, phi_samples, m);
      phi_b = bergman_weight(mixed, space, nodes, &step.kernel_change, threads);
      phi_b.id = step.weight_id;
      if (step.kernel_change >= kConvergenceTolerance)
        throw Error(ErrorKind::unconverged, "kernel unconverged at step " + std::to_string(k) +
                                                " (relative change " + std::to_string(step.kernel_change) + ")");

      step.bound = ledger_bound(m, k, cfg.eps0);
      step.closed_form = ledger_bound_closed(m, k, cfg.eps0);
      step.delta = std::max(0.0, cfg.twist - step.bound);

      double min_trace = std::numeric_limits<double>::infinity();
      double min_schur = std::numeric_limits<double>::infinity();
      double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin, defect = 0.0;
      for (const PointLayout& pl : layout) {
        const RMatrix block_h = phi_b.values.middleCols(pl.offset_h, per);
        const RMatrix block_h2 = phi_b.values.middleCols(pl.offset_h2, per);
        // Fiber derivatives at t0 for the Schur diagnostic.
        const int d = space->domain.dim();
        std::vector<std::vector<CVector>> dbar_stencil(static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a)
          for (Index j = 0; j < per; ++j) dbar_stencil[static_cast<std::size_t>(a)].push_back(space->diff.dbar(block_h.col(j).cast<cplx>(), a));
        std::vector<std::vector<CVector>> ff_cols(static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) ff_cols[static_cast<std::size_t>(a)].push_back(space->diff.d(dbar_stencil[static_cast<std::size_t>(b)][0], a));

        const Index ref = nodes.front();
        for (Index q : nodes) {
          const HermitianMatrix h1 = fd_hessian(RVector(block_h.row(q).transpose()), pl.st_h);
          const HermitianMatrix h2 = fd_hessian(RVector(block_h2.row(q).transpose()), pl.st_h2);
          const HermitianMatrix tt = cfg.check.richardson ? HermitianMatrix((4.0 * h2 - h1) / 3.0) : h1;
          min_trace = std::min(min_trace, tt.trace().real());

          ComplexHessian hq;
          hq.tt = tt;
          hq.ff.resize(d, d);
          hq.tf.resize(n, d);
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) hq.ff(a, b) = ff_cols[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)](q);
          hq.ff = (0.5 * (hq.ff + hq.ff.adjoint())).eval();
          for (int b = 0; b < d; ++b) {
            // d/dt of the real and imaginary parts of dbar_xi phi over the stencil.
            RVector re(per), im(per);
            for (Index j = 0; j < per; ++j) {
              re(j) = dbar_stencil[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)](q).real();
              im(j) = dbar_stencil[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)](q).imag();
            }
            const CVector gr = fd_gradient(re, pl.st_h);
            const CVector gi = fd_gradient(im, pl.st_h);
            for (int a = 0; a < n; ++a) hq.tf(a, b) = gr(a) + cplx(0.0, 1.0) * gi(a);
          }
          try {
            min_schur = std::min(min_schur, schur_trace(hq));
          } catch (const Error&) {
            min_schur = -std::numeric_limits<double>::infinity();
          }

          pmin = std::min(pmin, block_h(q, 0));
          pmax = std::max(pmax, block_h(q, 0));
          for (Index j = 1; j < per; ++j)
            defect = std::max(defect, std::abs((block_h(q, j) - block_h(q, 0)) - (block_h(ref, j) - block_h(ref, 0))));
        }
      }
      step.measured_trace = min_trace;
      step.measured_schur = min_schur;
      step.margin = min_trace - n * step.bound;
      step.untwisted_trace = min_trace - n * cfg.twist;
      step.potential_min = pmin;
      step.potential_max = pmax;
      step.normalized_min = pmin - pmax;
      step.separable_defect = defect;
      step.pass = step.margin >= -cfg.check.tolerance;
      ledger.steps.push_back(step);
    }
  } catch (const Error& e) {
    ledger.aborted = true;
    ledger.abort_reason = e.what();
  }
  return ledger;
}

}  // namespace bergman_lab
