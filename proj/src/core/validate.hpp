#pragma once

#include <string>
#include <vector>

namespace qac {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // measured value vs bound, or the failure reason
};

// Fast internal self-checks (a few seconds total): closed-form physics
// limits, numerical invariants, determinism, and serialization
// round-trips. Every check runs even after failures.
std::vector<CheckResult> run_validation_suite();

}  // namespace qac
