#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bergman_lab/bergman.hpp"
#include "bergman_lab/iteration.hpp"
#include "bergman_lab/weights.hpp"

namespace bergman_lab {

/// Names accepted in a scenario's `checks` list, in registry order.
const std::vector<std::string>& registered_checks();
bool is_registered_check(const std::string& name);

struct Numerics {
  int degree = 24;
  int n_radial = 64;
  int n_angular = 128;
  double fd_step = 1e-2;
  double tolerance = 1e-3;
};

struct Scenario {
  std::string id = "scenario";
  int base_dim = 1;
  BasePatch patch;
  BasePoint t0;
  FiberDomain fiber;

  std::string weight_kind;   // quadratic | polynomial | custom
  std::string weight_source; // the matrix, polynomial or expression text
  WeightFamily weight;

  std::vector<std::pair<std::string, std::string>> section_sources;  // (map, amplitude)
  SectionFamily sections;
  std::string frame_source;
  std::vector<Polynomial> frame;

  Numerics numerics;
  std::optional<double> eps0;  // stated by hand; certified when absent
  double twist = 0.0;          // C for the twisted iteration

  int iteration_m = 2;
  int iteration_steps = 8;
  IterationStart iteration_start = IterationStart::flat;

  int grid_base_rings = 2;
  int grid_angles = 8;
  int grid_fiber_rings = 3;

  std::vector<std::string> checks;
  std::uint64_t seed = 0;

  /// Every resolved field, defaults included, as key = value lines in a
  /// fixed order. This is what the config hash is taken over.
  std::vector<std::pair<std::string, std::string>> echo() const;
  std::string canonical() const;

  SamplingGrid sampling_grid() const;
  std::shared_ptr<const FiberSpace> fiber_space() const;
};

/// Parses the line-oriented `key = value` format ('#' starts a comment).
/// Errors name the line and the field.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

struct ScenarioOverrides {
  std::optional<double> fd_step;
  std::optional<int> degree;
  std::optional<std::uint64_t> seed;
};

/// Applies CLI overrides and re-runs the semantic checks.
void apply_overrides(Scenario& s, const ScenarioOverrides& o);

/// Parses "0.1+0.05i"-style complex literals.
cplx parse_complex(const std::string& text);

}  // namespace bergman_lab
