#pragma once

// Cross-checks of the closed forms against the Fock-space oracle and the
// Poisson Fisher pipeline. Drives the `verify` command.

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "polarimetry/errors.hpp"

namespace polarimetry {

struct VerifyOptions {
  double s0_max = 4.0;  // 0 runs the vacuum checks only
  int trials = 20;      // random states per randomized check
  std::uint64_t seed = 1;
  /// Name of a check whose closed-form reference gets its sign flipped, to
  /// prove the harness notices.
  std::string inject_fault;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // largest deviation seen
  double tol = 0.0;
  std::string detail;
};

struct VerifySummary {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  std::vector<std::string> failed() const;
};

/// Names of all checks in run order.
const std::vector<std::string>& verify_check_names();

/// Throws InvalidState for an unknown inject_fault name or s0_max < 0.
VerifySummary run_verification(const VerifyOptions& opt);

nlohmann::ordered_json to_json(const VerifySummary& s);

}  // namespace polarimetry
