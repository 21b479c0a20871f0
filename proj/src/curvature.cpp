#include "bergman_lab/curvature.hpp"

#include <cmath>
#include <sstream>

#include "bergman_lab/finite_difference.hpp"
#include "bergman_lab/parallel.hpp"

namespace bergman_lab {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::unconverged: return "unconverged";
  }
  return "?";
}

Stencil make_stencil(const BasePoint& t0, double h, const BasePatch* patch) {
  if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, "FD step must be positive");
  Stencil st;
  st.center = t0;
  st.h = h;
  for (const CVector& off : polarization_offsets(static_cast<int>(t0.size()), h)) {
    BasePoint p = t0 + off;
    if (patch != nullptr && !patch->contains(p, 1e-12)) {
      std::ostringstream os;
      os << "stencil point (" << p.transpose() << ") leaves the base patch of radius " << patch->radius;
      throw Error(ErrorKind::outside_domain, os.str());
    }
    st.points.push_back(std::move(p));
  }
  return st;
}

RVector sample_field(const BaseField& f, const Stencil& st, int threads) {
  RVector out(static_cast<Index>(st.points.size()));
  parallel_for(st.points.size(), threads, [&](std::size_t j) { out(static_cast<Index>(j)) = f(st.points[j]); });
  return out;
}

HermitianMatrix fd_hessian(const RVector& samples, const Stencil& st) {
  return assemble_polarized_hessian(samples, st.dim(), st.h);
}

HermitianMatrix fd_hessian(const BaseField& f, const Stencil& st, int threads) {
  return fd_hessian(sample_field(f, st, threads), st);
}

CVector fd_gradient(const RVector& samples, const Stencil& st) {
  return assemble_polarized_gradient(samples, st.dim(), st.h);
}

FieldHessian field_hessian(const BaseField& f, const BasePoint& t0, const CheckConfig& cfg) {
  FieldHessian out;
  out.stencil_h = make_stencil(t0, cfg.h, &cfg.patch);
  out.stencil_h2 = make_stencil(t0, 0.5 * cfg.h, &cfg.patch);
  // Sample both stencils in one parallel pass.
  Stencil joint;
  joint.center = t0;
  joint.points = out.stencil_h.points;
  joint.points.insert(joint.points.end(), out.stencil_h2.points.begin(), out.stencil_h2.points.end());
  const RVector all = sample_field(f, joint, cfg.threads);
  const Index m = static_cast<Index>(out.stencil_h.points.size());
  out.samples_h = all.head(m);
  out.samples_h2 = all.tail(m);
  const HermitianMatrix h1 = fd_hessian(out.samples_h, out.stencil_h);
  const HermitianMatrix h2 = fd_hessian(out.samples_h2, out.stencil_h2);
  out.trace_h = h1.trace().real();
  out.trace_h2 = h2.trace().real();
  out.hessian = cfg.richardson ? HermitianMatrix((4.0 * h2 - h1) / 3.0) : h1;
  return out;
}

namespace {

void fill_trace(CurvatureReport& r, const FieldHessian& fh) {
  r.hessian = fh.hessian;
  r.trace = fh.hessian.trace().real();
  r.trace_h = fh.trace_h;
  r.trace_h2 = fh.trace_h2;
  r.fd_error = std::abs(fh.trace_h2 - fh.trace_h) / 3.0;
}

void require_converged(const ConvergenceDiagnostic& c, const std::string& field) {
  if (c.converged) return;
  std::ostringstream os;
  os << field << ": kernel diagonal changed by " << c.relative_change << " between degree " << c.degree - 2
     << " and " << c.degree << " (limit " << kConvergenceTolerance << ")";
  throw Error(ErrorKind::unconverged, os.str());
}

}  // namespace

BaseField section_field(const WeightFamily& w, const SectionFamily& fam, std::shared_ptr<const FiberSpace> space) {
  return [&w, &fam, space](const BasePoint& t) { return section_value(w, fam, t, space); };
}

BaseField log_section_field(const WeightFamily& w, const SectionFamily& fam,
                            std::shared_ptr<const FiberSpace> space) {
  return [&w, &fam, space](const BasePoint& t) {
    const double b = section_value(w, fam, t, space);
    if (!(b > 0.0)) throw Error(ErrorKind::non_finite, "B<a,a> vanishes; log is undefined");
    return std::log(b);
  };
}

ConvergenceDiagnostic section_convergence(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0,
                                          std::shared_ptr<const FiberSpace> space) {
  const BergmanBasis b = bergman_basis(w, t0, std::move(space));
  return kernel_convergence(b, section_points(fam, t0));
}

CurvatureReport check_section_inequality(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0,
                                         double eps0, const CheckConfig& cfg) {
  CurvatureReport r;
  r.field_name = "B<a,a>";
  r.t0 = t0;
  r.h = cfg.h;
  r.convergence = section_convergence(w, fam, t0, cfg.space);
  require_converged(r.convergence, r.field_name);
  const FieldHessian fh = field_hessian(section_field(w, fam, cfg.space), t0, cfg);
  fill_trace(r, fh);
  r.reference = fh.samples_h(0);
  r.bound = w.base_dim() * eps0 * r.reference;
  r.margin = r.trace - r.bound;
  r.tolerance = cfg.tolerance * std::max(1.0, r.reference);
  r.decide();
  return r;
}

LggShift lgg_shift(const RVector& samples, const Stencil& st) {
  LggShift out;
  out.b0 = samples(0);
  if (!(out.b0 > 0.0)) throw Error(ErrorKind::invalid_argument, "LGG shift needs B0 > 0");
  out.alpha = -2.0 / out.b0 * fd_gradient(samples, st);
  out.shifted.resize(samples.size());
  for (std::size_t j = 0; j < st.points.size(); ++j) {
    const cplx s = out.alpha.transpose() * (st.points[j] - st.center);
    out.shifted(static_cast<Index>(j)) = std::exp(s.real()) * samples(static_cast<Index>(j));
  }
  return out;
}

CurvatureReport check_log_inequality(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0,
                                     double eps0, const CheckConfig& cfg) {
  CurvatureReport r;
  r.field_name = "log B<a,a>";
  r.t0 = t0;
  r.h = cfg.h;
  r.convergence = section_convergence(w, fam, t0, cfg.space);
  require_converged(r.convergence, r.field_name);
  const FieldHessian fh = field_hessian(log_section_field(w, fam, cfg.space), t0, cfg);
  fill_trace(r, fh);
  r.reference = 1.0;
  r.bound = w.base_dim() * eps0;
  r.margin = r.trace - r.bound;
  r.tolerance = cfg.tolerance;
  r.decide();

  // Linear check on the shifted field, which must reach the same verdict.
  const RVector b_h = fh.samples_h.array().exp();
  const RVector b_h2 = fh.samples_h2.array().exp();
  const LggShift s1 = lgg_shift(b_h, fh.stencil_h);
  const LggShift s2 = lgg_shift(b_h2, fh.stencil_h2);
  const double t1 = fd_hessian(s1.shifted, fh.stencil_h).trace().real();
  const double t2 = fd_hessian(s2.shifted, fh.stencil_h2).trace().real();
  const double shifted_trace = cfg.richardson ? (4.0 * t2 - t1) / 3.0 : t1;
  const double b0 = s1.b0;
  const double lgg_margin = shifted_trace - w.base_dim() * eps0 * b0;
  r.extras["B0"] = b0;
  r.extras["lgg_trace_over_b0"] = shifted_trace / b0;
  r.extras["lgg_margin"] = lgg_margin;
  r.extras["lgg_pass"] = lgg_margin >= -cfg.tolerance * b0 ? 1.0 : 0.0;
  r.extras["lgg_alpha_norm"] = s1.alpha.norm();
  return r;
}

CurvatureReport check_det_inequality(const DirectImageGram& dig, const Stencil& st, double eps0, double tolerance) {
  if (dig.grams.size() != st.points.size())
    throw Error(ErrorKind::grid_mismatch, "Gram matrices must be evaluated on the stencil points");
  RVector samples(static_cast<Index>(st.points.size()));
  for (std::size_t j = 0; j < st.points.size(); ++j) samples(static_cast<Index>(j)) = -dig.log_det(j);
  CurvatureReport r;
  r.field_name = "-log det G";
  r.t0 = st.center;
  r.h = st.h;
  r.hessian = fd_hessian(samples, st);
  r.trace = r.trace_h = r.hessian.trace().real();
  const int rank = static_cast<int>(dig.frame.size());
  r.bound = st.dim() * rank * eps0;
  r.margin = r.trace - r.bound;
  r.tolerance = tolerance;
  r.extras["rank"] = rank;
  r.decide();
  return r;
}

CurvatureReport check_det_inequality(const WeightFamily& w, const std::vector<Polynomial>& frame,
                                     const BasePoint& t0, double eps0, const CheckConfig& cfg) {
  auto space = cfg.space;
  const BaseField field = [&](const BasePoint& t) { return -log_det_hpd(frame_gram(w, frame, t, *space)); };
  CurvatureReport r;
  r.field_name = "-log det G";
  r.t0 = t0;
  r.h = cfg.h;
  const FieldHessian fh = field_hessian(field, t0, cfg);
  fill_trace(r, fh);
  const int rank = static_cast<int>(frame.size());
  r.reference = 1.0;
  r.bound = w.base_dim() * rank * eps0;
  r.margin = r.trace - r.bound;
  r.tolerance = cfg.tolerance;
  r.extras["rank"] = rank;
  r.extras["log_det_G"] = -fh.samples_h(0);
  r.decide();
  return r;
}

double psh_spectrum(const RVector& samples, const Stencil& st) { return min_eigenvalue(fd_hessian(samples, st)); }

double psh_spectrum(const BaseField& f, const Stencil& st, int threads) {
  return psh_spectrum(sample_field(f, st, threads), st);
}

}  // namespace bergman_lab
