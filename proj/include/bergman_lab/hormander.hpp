#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bergman_lab/bergman.hpp"
#include "bergman_lab/curvature.hpp"
#include "bergman_lab/weights.hpp"

namespace bergman_lab {

/// Node values of Gamma and of Lambda_alpha (one column per base direction)
/// at t0, together with the basis and weight slice they were built from.
///
/// Gamma is the representer of u -> sum_i a_i(t0) u(s_i(t0)):
///   Gamma(xi) = sum_i conj(a_i(t0)) K_{t0}(xi, s_i(t0)),
/// so that ||Gamma||^2 = B<a,a>(t0). Lambda_alpha applies
/// d/dt_alpha - (d phi/dt_alpha) to the same combination, with the
/// amplitudes frozen at t0 and the sections moving.
struct HormanderData {
  BasePoint t0;
  CVector gamma;
  CMatrix lambda;
  CMatrix lambda_raw;  // d/dt_alpha alone, without the weight term
  BergmanBasis basis;
  std::vector<ComplexHessian> hessians;  // phi at (t0, node)

  int n() const { return static_cast<int>(lambda.cols()); }
};

CVector gamma_field(const BergmanBasis& b, const SectionFamily& fam);
CVector gamma_field(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0,
                    std::shared_ptr<const FiberSpace> space);

/// Lambda_alpha on the nodes. d/dt uses sixth-order complex central
/// differences (points +-h, +-2h, +-3h along Re and Im of t_alpha). With
/// weight_term = false the result is the plain derivative.
CVector lambda_field(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0, int alpha,
                     std::shared_ptr<const FiberSpace> space, double h, bool weight_term = true, int threads = 1);

HormanderData hormander_data(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0,
                             std::shared_ptr<const FiberSpace> space, double h, int threads = 1);

/// Per-direction values and a pass flag for one of the checks below.
struct HormanderCheck {
  std::string name;
  std::vector<double> value;  // residual or lhs, per alpha
  std::vector<double> scale;  // normalizer or rhs, per alpha
  std::vector<double> ratio;  // value / scale
  double worst = 0.0;
  double limit = 0.0;
  bool pass = true;
  std::map<std::string, double> extras;
};

inline constexpr double kOrthogonalityLimit = 1e-6;
inline constexpr double kDbarLimit = 1e-4;
inline constexpr double kHormanderSlack = 1e-4;

/// max_i |<u_i, Lambda_alpha>| / max(||Lambda_alpha||, 1e-4 ||Gamma||).
/// use_raw selects the field without the weight term (negative control).
HormanderCheck orthogonality_residual(const HormanderData& data, bool use_raw = false);

/// L^2(exp(-phi)) norm over interior nodes (outer two rings dropped) of
/// dbar Lambda_alpha + Gamma * phi_{t_alpha xibar}, divided by
/// ||Gamma|| * max |phi_{t_alpha xibar}| (or ||Gamma|| when that vanishes).
HormanderCheck dbar_identity_residual(const HormanderData& data, const WeightFamily& w, bool use_raw = false);

/// ||Lambda_alpha||^2 against the integral of |Gamma|^2 (tf ff^{-1} tf^H)_{aa}.
/// Passes when lhs <= rhs (1 + 1e-4) + 1e-10 ||Gamma||^2.
HormanderCheck hormander_bound_check(const HormanderData& data, const WeightFamily& w);

/// lhs = trace Hess B<a,a>(t0) by FD; rhs = integral of |Gamma|^2 times the
/// pointwise Schur trace; intermediate = sum_alpha integral of
/// phi_{aabar}|Gamma|^2 - |Lambda_alpha|^2. Passes when lhs >= rhs - tol and
/// rhs >= n eps0 B - tol.
struct AssembledBound {
  double lhs = 0.0;
  double intermediate = 0.0;
  double rhs = 0.0;
  double section_value = 0.0;
  double bound = 0.0;  // n eps0 B(t0)
  double tolerance = 0.0;
  double chain_margin = 0.0;  // lhs - rhs
  double bound_margin = 0.0;  // rhs - bound
  bool pass = true;
};

AssembledBound assembled_lower_bound(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t0,
                                     double eps0, const CheckConfig& cfg, const HormanderData* data = nullptr);

}  // namespace bergman_lab
