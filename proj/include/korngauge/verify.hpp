#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace korngauge::verify {

struct VerifyOptions {
  int trials = 200;
  std::uint64_t seed = 20240901;
  bool inject_failure = false;  // negative control: perturb one assembly entry
  bool run_identity_checks = true;
  bool run_form_checks = true;
};

struct CheckResult {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  int cases = 0;
  bool passed = false;
};

struct VerifyResult {
  std::vector<CheckResult> checks;
  bool passed() const;
  std::vector<std::string> failures() const;
  nlohmann::json to_json() const;
};

/// Runs the identity verifiers (pointwise matrix identities, exact integral
/// identities, boundary-family equalities) and the assembled-form identity
/// checks (matrix decompositions and reduced-space equalities).
VerifyResult run_verification(const VerifyOptions& options);

}  // namespace korngauge::verify
