#pragma once

#include <string>
#include <vector>

namespace bergman_lab {

struct AcceptanceResult {
  std::string id;       // "A1" ... "A12"
  std::string title;
  bool numeric_pass = false;
  double seconds = 0.0;
  double time_limit = 0.0;  // seconds, for the slowest case
  double slowest_case = 0.0;
  std::string detail;

  bool within_time() const { return slowest_case <= time_limit; }
  bool pass() const { return numeric_pass && within_time(); }
  std::string line() const;
};

const std::vector<std::string>& acceptance_ids();

AcceptanceResult run_criterion(const std::string& id, int threads = 1);

/// All criteria in order, or only those listed.
std::vector<AcceptanceResult> run_acceptance(int threads = 1, const std::vector<std::string>& only = {});

}  // namespace bergman_lab
