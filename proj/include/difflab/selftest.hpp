#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace difflab::selftest {

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Worst observed error and its tolerance.
  std::string detail;
};

/// Numerical oracle checks: Gamma-ratio products against direct products,
/// series constants, log-Gamma spot values, and loss gradients against
/// central finite differences.
std::vector<CheckResult> run_all();

/// Prints one "PASS|FAIL name: detail" line per check; returns true when
/// every check passed.
bool report(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace difflab::selftest
