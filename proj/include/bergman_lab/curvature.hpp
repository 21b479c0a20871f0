#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bergman_lab/bergman.hpp"
#include "bergman_lab/weights.hpp"

namespace bergman_lab {

/// Evaluation points for the complex Hessian of a base field at `center`
/// (see polarization_offsets for the layout).
struct Stencil {
  BasePoint center;
  double h = 1e-2;
  std::vector<BasePoint> points;

  int dim() const { return static_cast<int>(center.size()); }
};

// Throws outside_domain when a stencil point leaves the patch.
Stencil make_stencil(const BasePoint& t0, double h, const BasePatch* patch = nullptr);

using BaseField = std::function<double(const BasePoint&)>;

RVector sample_field(const BaseField& f, const Stencil& st, int threads = 1);

HermitianMatrix fd_hessian(const RVector& samples, const Stencil& st);
HermitianMatrix fd_hessian(const BaseField& f, const Stencil& st, int threads = 1);
CVector fd_gradient(const RVector& samples, const Stencil& st);

enum class Verdict { pass, fail, unconverged };

const char* to_string(Verdict v);

struct CurvatureReport {
  std::string field_name;
  BasePoint t0;
  double h = 0.0;
  HermitianMatrix hessian;
  double trace = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  double tolerance = 0.0;
  double reference = 1.0;  // value the bound is scaled by (B(t0) or 1)
  double trace_h = 0.0;    // plain step h
  double trace_h2 = 0.0;   // step h/2
  double fd_error = 0.0;   // |trace_h2 - trace_h| / 3
  ConvergenceDiagnostic convergence;
  std::map<std::string, double> extras;
  Verdict verdict = Verdict::pass;

  void decide() { verdict = margin >= -tolerance ? Verdict::pass : Verdict::fail; }
};

struct CheckConfig {
  std::shared_ptr<const FiberSpace> space;
  BasePatch patch;
  double h = 1e-2;
  double tolerance = 1e-3;
  // Extrapolate from steps h and h/2; otherwise report the step-h Hessian.
  bool richardson = true;
  int threads = 1;
};

/// Hessian of a sampled base field with the Richardson step applied.
struct FieldHessian {
  HermitianMatrix hessian;
  double trace_h = 0.0;
  double trace_h2 = 0.0;
  RVector samples_h;
  RVector samples_h2;
  Stencil stencil_h;
  Stencil stencil_h2;
};

FieldHessian field_hessian(const BaseField& f, const BasePoint& t0, const CheckConfig& cfg);

/// trace Hess B<a,a>(t0) >= n eps0 B(t0) - tolerance * max(1, B(t0)).
/// Throws unconverged when the kernel diagnostic fails at the sections.
CurvatureReport check_section_inequality(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0,
                                         double eps0, const CheckConfig& cfg);

/// trace Hess log B<a,a>(t0) >= n eps0 - tolerance. Extras carry the
/// shifted-field comparison (lgg_trace_over_b0, lgg_margin, lgg_pass).
CurvatureReport check_log_inequality(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0,
                                     double eps0, const CheckConfig& cfg);

struct LggShift {
  RVector shifted;
  CVector alpha;
  double b0 = 0.0;
};

/// alpha = -(2 / B0) dB/dt(t0) and the samples multiplied by
/// exp(Re sum alpha_i (t_i - t0_i)).
LggShift lgg_shift(const RVector& samples, const Stencil& st);

/// trace Hess(-log det G)(t0) >= n r eps0 - tolerance with r = frame size.
CurvatureReport check_det_inequality(const WeightFamily& w, const std::vector<Polynomial>& frame,
                                     const BasePoint& t0, double eps0, const CheckConfig& cfg);

/// Same check from Gram matrices already evaluated on the stencil points.
CurvatureReport check_det_inequality(const DirectImageGram& dig, const Stencil& st, double eps0, double tolerance);

/// Smallest eigenvalue of the FD Hessian.
double psh_spectrum(const RVector& samples, const Stencil& st);
double psh_spectrum(const BaseField& f, const Stencil& st, int threads = 1);

/// Field t -> log B<a,a>(t) on the configured fiber space.
BaseField log_section_field(const WeightFamily& w, const SectionFamily& fam, std::shared_ptr<const FiberSpace> space);
BaseField section_field(const WeightFamily& w, const SectionFamily& fam, std::shared_ptr<const FiberSpace> space);

/// Kernel convergence at the section points of the basis at t0.
ConvergenceDiagnostic section_convergence(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0,
                                          std::shared_ptr<const FiberSpace> space);

}  // namespace bergman_lab
