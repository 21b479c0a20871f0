#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bergman_lab/bergman.hpp"
#include "bergman_lab/curvature.hpp"
#include "bergman_lab/weights.hpp"

namespace bergman_lab {

/// A weight known only through samples: values(q, j) = phi(points[j], node_q).
struct SampledWeight {
  std::string id;
  std::vector<BasePoint> points;
  RMatrix values;

  Index nodes() const { return values.rows(); }
};

SampledWeight sample_weight(const WeightFamily& w, const std::vector<BasePoint>& points, const QuadratureRule& quad,
                            const std::string& id, int threads = 1);

SampledWeight flat_weight(const std::vector<BasePoint>& points, Index nodes, const std::string& id = "flat");

/// (1 - 1/m) phi_b + phi_l / m. Throws grid_mismatch unless both share points and nodes.
SampledWeight mix_weights(const SampledWeight& phi_b, const SampledWeight& phi_l, int m);

/// log K_t(xi, xi) of the weight slice at every sample point (the potential
/// of the fiberwise Bergman metric 1/K). `worst_change` receives the largest
/// kernel change between degree N - 2 and N over `check_nodes`.
SampledWeight bergman_weight(const SampledWeight& w, std::shared_ptr<const FiberSpace> space,
                             const std::vector<Index>& check_nodes, double* worst_change = nullptr, int threads = 1);

/// Nodes with every coordinate in the inner `fraction` of the radial range.
std::vector<Index> measurement_nodes(const FiberSpace& space, double fraction = 0.6);

/// Series value (1/m) sum_{i<k} (1 - 1/m)^i eps0, compensated summation.
double ledger_bound(int m, int k, double eps0);
/// Closed form (1 - (1 - 1/m)^k) eps0.
double ledger_bound_closed(int m, int k, double eps0);

struct IterationStep {
  int k = 0;
  std::string weight_id;
  double bound = 0.0;          // b_k
  double closed_form = 0.0;    // (1 - (1-1/m)^k) eps0
  double measured_trace = 0.0; // min over base points and nodes of trace_t Hess log K
  double measured_schur = 0.0; // min pointwise Schur trace (diagnostic)
  double margin = 0.0;         // measured_trace - n b_k
  double delta = 0.0;          // untwisted slack max(0, C - b_k)
  double untwisted_trace = 0.0;
  double potential_min = 0.0;
  double potential_max = 0.0;
  double normalized_min = 0.0;  // after subtracting the max
  double separable_defect = 0.0;
  double kernel_change = 0.0;
  bool pass = true;
};

struct IterationLedger {
  int m = 2;
  int n = 1;
  double eps0 = 0.0;
  double target = 0.0;
  double twist = 0.0;
  std::string start;
  std::vector<IterationStep> steps;
  bool aborted = false;
  std::string abort_reason;
  double tolerance = 1e-3;

  bool pass() const;
};

enum class IterationStart { flat, bergman };

struct IterationConfig {
  CheckConfig check;                 // space, patch, h, tolerance, threads
  std::vector<BasePoint> base_points;
  IterationStart start = IterationStart::flat;
  double eps0 = 0.0;                 // certified constant of the (twisted) weight
  double twist = 0.0;                // C already added to the weight, for slack reporting
  double node_fraction = 0.6;
};

/// Runs K <= 12 steps of phi_k = (1-1/m) phi_{B,k-1} + phi_L/m,
/// phi_{B,k} = log K of phi_k, independently at each base point's stencil.
IterationLedger run_iteration(const WeightFamily& phi_l, int m, int steps, const IterationConfig& cfg);

}  // namespace bergman_lab
