// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line each. Exit code is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "checks.hpp"

int main(int argc, char** argv) {
  const uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 0;
  using namespace sliphom::checks;

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<CheckResult> criteria = run_acceptance(seed);
  const double criteria_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  int failures = 0;
  for (const CheckResult& r : criteria) {
    std::printf("[%s] criterion %s  (%.2fs)%s%s\n", r.pass ? "PASS" : "FAIL", r.id.c_str(),
                r.seconds, r.pass ? "" : " -- ", r.pass ? "" : r.detail.c_str());
    if (!r.pass) ++failures;
  }

  // Criterion 15: the fast verification level finishes inside a minute and
  // the full set (all criteria plus the fast suites) inside fifteen.
  const auto t1 = std::chrono::steady_clock::now();
  const std::vector<CheckResult> fast = run_properties(Level::fast, seed);
  const double fast_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  bool fast_pass = fast_seconds < 60.0;
  std::string detail;
  for (const CheckResult& r : fast) {
    if (!r.pass) {
      fast_pass = false;
      detail += " " + r.id;
    }
  }
  const bool budget_pass = fast_seconds + criteria_seconds < 15.0 * 60.0;
  const bool c15 = fast_pass && budget_pass;
  std::printf("[%s] criterion 15: timing (fast %.1fs < 60s, total %.1fs < 900s)%s\n",
              c15 ? "PASS" : "FAIL", fast_seconds, fast_seconds + criteria_seconds,
              detail.c_str());
  if (!c15) ++failures;

  std::printf("%s: %d/%d criteria passed\n", failures == 0 ? "PASS" : "FAIL",
              static_cast<int>(criteria.size()) + 1 - failures,
              static_cast<int>(criteria.size()) + 1);
  return failures;
}
