// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <iostream>

#include "bergman_lab/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const std::string& id : bergman_lab::acceptance_ids()) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const bergman_lab::AcceptanceResult r = bergman_lab::run_criterion(id);
    std::cout << r.line() << std::endl;
    if (!r.pass()) ++failures;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
