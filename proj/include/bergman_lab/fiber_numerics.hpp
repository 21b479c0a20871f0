#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bergman_lab/types.hpp"

namespace bergman_lab {

enum class DomainKind { disk, polydisc, annulus };

const char* to_string(DomainKind kind);

/// Bounded Reinhardt fiber: a disk, a polydisc, or a product of annuli.
/// Fiber dimension is capped at 2.
struct FiberDomain {
  DomainKind kind = DomainKind::disk;
  std::vector<double> outer;  // one outer radius per coordinate
  std::vector<double> inner;  // annulus only; zeros otherwise

  static FiberDomain disk(double radius = 1.0);
  static FiberDomain polydisc(std::vector<double> radii);
  static FiberDomain annulus(std::vector<double> inner, std::vector<double> outer);

  int dim() const { return static_cast<int>(outer.size()); }
  double inner_radius(int coord) const;
  double volume() const;

  // Throws invalid_argument when the geometry is inconsistent.
  void validate() const;

  // True when every coordinate stays at least margin_frac * outer radius
  // away from the boundary circles.
  bool contains(const FiberPoint& xi, double margin_frac = 0.0) const;
};

/// Radial Gauss-Legendre nodes and a uniform angular grid for one fiber
/// coordinate.
struct PolarAxis {
  double r_in = 0.0;
  double r_out = 1.0;
  RVector radii;           // ascending
  RVector radial_weights;  // Gauss-Legendre weights on [r_in, r_out], no Jacobian
  RVector angles;          // 2*pi*j/n_angular
};

/// Tensor-product polar quadrature. Node index layout: for coordinate a the
/// local index is ir * n_angular + j, and the first coordinate varies
/// slowest.
struct QuadratureRule {
  CMatrix nodes;    // size() x d
  RVector weights;  // area measure, polar Jacobian included
  int n_radial = 0;
  int n_angular = 0;
  std::vector<PolarAxis> axes;

  Index size() const { return weights.size(); }
  int dim() const { return static_cast<int>(axes.size()); }
  FiberPoint node(Index q) const { return nodes.row(q).transpose(); }
};

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
std::pair<RVector, RVector> gauss_legendre(int n);

QuadratureRule build_quadrature(const FiberDomain& domain, int n_radial, int n_angular);

/// Monomials xi^e with |e| <= N in graded-lexicographic order: by total
/// degree, then by descending exponent of the first coordinate.
struct MonomialBasis {
  int max_degree = 0;
  int dim = 1;
  std::vector<std::vector<int>> exponents;

  Index size() const { return static_cast<Index>(exponents.size()); }
  int degree(Index j) const;
  // Number of monomials of total degree <= deg (a leading block).
  Index size_up_to(int deg) const;

  CVector evaluate(const FiberPoint& xi) const;
  // Rows are points, columns are monomials.
  CMatrix evaluate_rows(const CMatrix& points) const;
  std::string name(Index j) const;
};

MonomialBasis monomial_basis(int dim, int max_degree);

/// sum_q f_q * conj(g_q) * weight_values_q * quad_weight_q, with
/// weight_values_q = exp(-phi(t, node_q)).
cplx weighted_inner_product(const CVector& f, const CVector& g, const RVector& weight_values,
                            const QuadratureRule& quad);

/// Gram matrix of sampled functions (columns of `values`, rows are nodes):
/// G(j, k) = <f_k, f_j> = sum_q conj(f_j) f_k w_q, i.e. V^H W V.
HermitianMatrix gram_matrix(const CMatrix& values, const RVector& weight_values,
                            const QuadratureRule& quad);
HermitianMatrix gram_matrix(const MonomialBasis& basis, const RVector& weight_values,
                            const QuadratureRule& quad);

struct Orthonormalization {
  CMatrix transform;  // upper triangular, transform^H * G * transform = I
  double condition = 1.0;
};

// Relative pivot threshold below which a Gram matrix is declared degenerate.
inline constexpr double kPivotThreshold = 1e-13;

/// Cholesky-based Gram-Schmidt in basis order. Throws degenerate_basis naming
/// the offending index (and degree when `basis` is given).
Orthonormalization orthonormalize(const HermitianMatrix& gram,
                                  const MonomialBasis* basis = nullptr);

/// Spectral derivatives of node samples along the polar structure of a
/// quadrature rule: barycentric Legendre interpolation in r, Fourier in theta.
class PolarDifferentiator {
 public:
  PolarDifferentiator() = default;
  explicit PolarDifferentiator(const QuadratureRule& quad);

  // d f / d xi_coord and d f / d conj(xi_coord).
  CVector d(const CVector& f, int coord) const;
  CVector dbar(const CVector& f, int coord) const;

  // Nodes whose radial index on every coordinate is neither among the
  // outer `excluded_outer` rings nor the inner `excluded_inner` rings.
  std::vector<char> interior_mask(int excluded_outer, int excluded_inner = 0) const;

 private:
  // Returns (d/dr f, d/dtheta f) along one coordinate.
  std::pair<CVector, CVector> polar_partials(const CVector& f, int coord) const;

  int dim_ = 0;
  int n_radial_ = 0;
  int n_angular_ = 0;
  std::vector<RMatrix> radial_;  // per coordinate
  RMatrix angular_;
  std::vector<PolarAxis> axes_;
};

}  // namespace bergman_lab
