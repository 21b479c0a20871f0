#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bergman_lab/expression.hpp"
#include "bergman_lab/fiber_numerics.hpp"
#include "bergman_lab/polynomial.hpp"
#include "bergman_lab/types.hpp"

namespace bergman_lab {

enum class WeightKind { quadratic_hermitian, polynomial_psh, custom };

const char* to_string(WeightKind kind);

/// Complex Hessian of phi split into base (t) and fiber (xi) blocks:
/// tt(a,b) = phi_{t_a tbar_b}, tf(a,k) = phi_{t_a xibar_k}, ff(k,m) = phi_{xi_k xibar_m}.
struct ComplexHessian {
  HermitianMatrix tt;
  CMatrix tf;
  HermitianMatrix ff;

  int n() const { return static_cast<int>(tt.rows()); }
  int d() const { return static_cast<int>(ff.rows()); }
  HermitianMatrix assembled() const;
  static ComplexHessian split(const HermitianMatrix& full, int n);
};

/// A real weight phi(t, xi) on base x fiber.
class WeightFamily {
 public:
  // Central-difference step used by the custom kind.
  static constexpr double kCustomStep = 1e-4;

  WeightFamily() = default;

  // phi = x^T H conj(x), x = (t, xi). H must be Hermitian of size n + d.
  static WeightFamily quadratic(const HermitianMatrix& h, int base_dim, int fiber_dim);
  static WeightFamily polynomial(const Polynomial& p, int base_dim, int fiber_dim);
  static WeightFamily custom(const Expression& e, int base_dim, int fiber_dim);

  WeightKind kind() const;
  int base_dim() const { return n_; }
  int fiber_dim() const { return d_; }
  // Coefficient C of the added C|t|^2.
  double twist() const { return twist_; }

  // Throws not_a_weight when the imaginary part exceeds 1e-12 relative.
  double value(const BasePoint& t, const FiberPoint& xi) const;
  // d phi / d t_alpha.
  cplx d_base(const BasePoint& t, const FiberPoint& xi, int alpha) const;
  ComplexHessian hessian(const BasePoint& t, const FiberPoint& xi) const;

  // phi + c|t|^2.
  WeightFamily twisted(double c) const;

  // Non-null for the quadratic kind: the (twisted) constant Hessian.
  const HermitianMatrix* constant_hessian() const;
  std::string describe() const;

 private:
  struct Impl;
  CVector join(const BasePoint& t, const FiberPoint& xi) const;
  cplx raw_value(const CVector& x) const;

  std::shared_ptr<const Impl> impl_;
  int n_ = 0;
  int d_ = 0;
  double twist_ = 0.0;
  HermitianMatrix twisted_h_;
};

ComplexHessian hessian_at(const WeightFamily& w, const BasePoint& t, const FiberPoint& xi);

/// Base trace of the Schur complement of the fiber block,
/// sum_a [tt - tf ff^{-1} tf^H]_{aa}. Throws fiber_degenerate unless ff > 0.
double schur_trace(const ComplexHessian& h);

/// Coefficient of dx_1 ^ dxbar_1 ^ ... in the wedge product of the (1,1)-forms
/// with the given coefficient matrices, up to a dimension-only constant:
/// sum over permutation pairs of sgn * prod_i M_i(sigma(i), tau(i)).
double wedge_top_coefficient(const std::vector<HermitianMatrix>& forms);

/// (n / (d+1)) * [H^{d+1} ^ P^{n-1}] / [H^d ^ P^n] with P the flat base form,
/// evaluated by the exterior-algebra expansion above.
double ma_ratio(const ComplexHessian& h, int n, int d);

/// sum tt_aa - 2 Re sum tf_{ak} conj(lambda_{ak}) + sum |lambda_{ak}|^2.
/// Requires ff = identity (see normalize_fiber_block).
double trace_quadratic_form(const ComplexHessian& h, const CMatrix& lambda);

/// Change of fiber frame making ff the identity; the Schur complement is
/// unchanged.
ComplexHessian normalize_fiber_block(const ComplexHessian& h);

/// Euclidean ball in the base.
struct BasePatch {
  BasePoint center;
  double radius = 0.5;

  int dim() const { return static_cast<int>(center.size()); }
  bool contains(const BasePoint& t, double slack = 0.0) const;
};

/// Sample points for certification.
struct SamplingGrid {
  std::vector<BasePoint> base_points;
  std::vector<FiberPoint> fiber_points;
  std::string description;
};

// Per base coordinate: the center plus `base_rings` circles of `angles`
// points, scaled so the product stays in the ball. Per fiber coordinate:
// `fiber_rings` circles strictly inside the domain (plus the origin for disks).
SamplingGrid make_sampling_grid(const BasePatch& patch, const FiberDomain& fiber, int base_rings = 2,
                                int angles = 8, int fiber_rings = 3);

struct WeightCertificate {
  double eps0 = 0.0;
  double C = 0.0;
  double psh_min_eig = 0.0;
  double min_schur_trace = 0.0;
  double min_fiber_eig = 0.0;
  bool fiber_positive = true;
  Index samples = 0;
  std::string grid_spec;
  std::string positivity_notion = "pointwise-schur-trace";
  std::vector<std::string> diagnostics;
};

/// Minimum over the grid of the assembled, base and fiber spectra and of the
/// Schur trace. eps0 is zero unless the fiber block is positive definite and
/// the assembled Hessian is psd to `tolerance` (scaled by the Hessian size).
WeightCertificate certify(const WeightFamily& w, const SamplingGrid& grid, int threads = 1,
                          double tolerance = 1e-9);

WeightFamily twist_weight(const WeightFamily& w, double c);

/// eps0 * (1 - delta)^(2n-2) / (1 + delta)^(2n).
double distortion_margin(int n, double delta, double eps0);

}  // namespace bergman_lab
