#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bergman_lab/report.hpp"
#include "bergman_lab/scenario.hpp"

namespace bergman_lab {

/// FNV-1a of the scenario's canonical echo (defaults and overrides included).
std::string config_hash(const Scenario& s);

struct RunOptions {
  int threads = 1;
  // Called once per finished check, in order (the single report writer).
  std::function<void(const CheckRecord&)> on_record;
};

/// Runs the named checks in order and collects their records. Numerical
/// errors become records with verdict "error" (or "unconverged").
RunReport run_checks(const Scenario& s, const std::vector<std::string>& checks, const RunOptions& opts = {});
RunReport run_scenario(const Scenario& s, const RunOptions& opts = {});

/// Check groups behind the CLI subcommands.
const std::vector<std::string>& checks_for(const std::string& subcommand);

}  // namespace bergman_lab
