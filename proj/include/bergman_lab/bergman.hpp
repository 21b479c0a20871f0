#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bergman_lab/fiber_numerics.hpp"
#include "bergman_lab/polynomial.hpp"
#include "bergman_lab/weights.hpp"

namespace bergman_lab {

/// Fiber geometry, quadrature and monomial samples at one resolution.
/// Shared read-only between all base points.
struct FiberSpace {
  FiberDomain domain;
  QuadratureRule quad;
  MonomialBasis basis;
  CMatrix monomials;  // nodes x basis size
  PolarDifferentiator diff;

  int degree() const { return basis.max_degree; }
};

std::shared_ptr<const FiberSpace> make_fiber_space(const FiberDomain& domain, int degree, int n_radial,
                                                   int n_angular);

/// exp(-phi(t, node)) for every quadrature node.
RVector slice_weights(const WeightFamily& w, const BasePoint& t, const QuadratureRule& quad);

/// Orthonormal frame u_i = sum_j transform(j, i) m_j of the truncated
/// holomorphic space for the weight slice at t.
struct BergmanBasis {
  BasePoint t;
  int degree = 0;
  CMatrix transform;
  double condition = 1.0;
  std::string weight_ref;
  HermitianMatrix gram;
  RVector weight_values;
  std::shared_ptr<const FiberSpace> space;

  Index size() const { return transform.cols(); }
  // (u_0(xi), ..., u_{M-1}(xi)).
  CVector frame(const FiberPoint& xi) const;
  // Row q holds the frame at node q.
  CMatrix frame_on_nodes() const;
};

BergmanBasis bergman_basis(const WeightFamily& w, const BasePoint& t,
                           std::shared_ptr<const FiberSpace> space);

// Same construction from precomputed exp(-phi) node values.
BergmanBasis bergman_basis_from_values(const BasePoint& t, const RVector& weight_values,
                                       std::shared_ptr<const FiberSpace> space, std::string weight_ref);

/// K(z, w) = sum_i u_i(z) conj(u_i(w)).
cplx kernel_eval(const BergmanBasis& b, const FiberPoint& z, const FiberPoint& w);

// K(z, z) using only the monomials of degree <= `degree` (nested subspace).
double kernel_diagonal(const BergmanBasis& b, const FiberPoint& z, int degree);

/// K(node_q, w) for every node.
CVector kernel_column(const BergmanBasis& b, const FiberPoint& w);

using FiberFunction = std::function<cplx(const FiberPoint&)>;

/// |h(w) - integral of h(xi) conj(K(xi, w)) exp(-phi)|.
double reproducing_residual(const BergmanBasis& b, const FiberFunction& h, const FiberPoint& w);

/// (K(w, w), sup |u(w)|^2 over the unit sphere); the latter from an
/// independent LDLT solve with the Gram matrix.
std::pair<double, double> extremal_check(const BergmanBasis& b, const FiberPoint& w);

/// Kernel diagonal at degree N against N - 2 at the given points.
struct ConvergenceDiagnostic {
  int degree = 0;
  double kernel_n = 0.0;
  double kernel_n_minus_2 = 0.0;
  double relative_change = 0.0;
  bool converged = true;
};

inline constexpr double kConvergenceTolerance = 1e-6;

ConvergenceDiagnostic kernel_convergence(const BergmanBasis& b, const std::vector<FiberPoint>& points,
                                         double tolerance = kConvergenceTolerance);

/// Holomorphic sections s_i: base -> fiber and amplitudes a_i, all
/// polynomials in t_1..t_n without conjugates.
struct SectionFamily {
  std::vector<std::vector<Polynomial>> maps;  // maps[i][k] = k-th fiber coordinate of s_i
  std::vector<Polynomial> amplitudes;

  int size() const { return static_cast<int>(maps.size()); }
  FiberPoint section(int i, const BasePoint& t) const;
  cplx amplitude(int i, const BasePoint& t) const;

  // Constant section xi with amplitude a, for base dimension n.
  static SectionFamily constant(int n, const FiberPoint& xi, cplx a = 1.0);
  void add(std::vector<Polynomial> map, Polynomial amplitude);

  // Structural checks: holomorphic, degree <= 4, matching dimensions.
  void validate_structure(int n, int d) const;
  // Every section stays margin_frac * radius inside the fiber at the given
  // base points; the error message names the section and the value.
  void validate_inside(const FiberDomain& fiber, const std::vector<BasePoint>& points,
                       double margin_frac = 0.05) const;
};

/// B_t<a,a> = sum_{k,p} a_k conj(a_p) K(s_k, s_p) = sum_i |sum_k a_k u_i(s_k)|^2.
double section_value(const BergmanBasis& b, const SectionFamily& fam);
double section_value(const WeightFamily& w, const SectionFamily& fam, const BasePoint& t,
                     std::shared_ptr<const FiberSpace> space);

/// Section points s_i(t) of a family.
std::vector<FiberPoint> section_points(const SectionFamily& fam, const BasePoint& t);

/// Gram matrices G(t) of a t-independent holomorphic frame,
/// G(j, k) = <w_k, w_j>_{phi(t, .)}.
struct DirectImageGram {
  std::vector<Polynomial> frame;  // polynomials in the fiber variables
  std::vector<BasePoint> points;
  std::vector<HermitianMatrix> grams;

  double log_det(std::size_t i) const;
};

HermitianMatrix frame_gram(const WeightFamily& w, const std::vector<Polynomial>& frame, const BasePoint& t,
                           const FiberSpace& space);

DirectImageGram direct_image_gram(const WeightFamily& w, const std::vector<Polynomial>& frame,
                                  const std::vector<BasePoint>& points, std::shared_ptr<const FiberSpace> space,
                                  int threads = 1);

/// log det of a positive definite matrix; throws indefinite otherwise.
double log_det_hpd(const HermitianMatrix& g);

/// Parses a frame list such as "1, z, z^2" (fiber variables only).
std::vector<Polynomial> parse_frame(const std::string& text, int fiber_dim);

}  // namespace bergman_lab
