#pragma once

#include <string>
#include <vector>

#include "frailty_vb/piecewise.hpp"

namespace frailty_vb {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// quadrature, approx-error-scan, monotonicity, tiny-posterior
const std::vector<std::string>& verify_check_names();

/// Runs the named checks (all when empty). Unknown names throw ValidationError.
std::vector<CheckResult> run_verify(const std::vector<std::string>& checks,
                                    const ApproximationTable& table = ApproximationTable::standard());

}  // namespace frailty_vb
