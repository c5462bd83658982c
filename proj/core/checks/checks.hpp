#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sliphom::checks {

enum class Level { fast, full };

struct CheckResult {
  std::string id;
  bool pass;
  std::string detail;  // failure description or short summary
  double seconds;
};

// Property suites across all modules (invariants, identities, convergence
// behaviors). `fast` runs small grids, `full` runs acceptance scales.
std::vector<CheckResult> run_properties(Level level, uint64_t seed);

// The acceptance criteria (1-14); criterion 15 is the timing of these runs
// and is evaluated by the caller.
std::vector<CheckResult> run_acceptance(uint64_t seed);

bool all_pass(const std::vector<CheckResult>& results);

}  // namespace sliphom::checks
