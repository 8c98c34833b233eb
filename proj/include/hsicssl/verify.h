#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hsicssl {

struct CheckResult {
  std::string family;
  std::string name;
  double observed = 0.0;   // worst error (or value) seen
  double tolerance = 0.0;  // bound the observation is held to
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 20210601;
  /// Test hook: added to every fast-path HSIC value before comparison. A
  /// nonzero value must make the linear-kernel identity check fail.
  double perturb_hsic_fast = 0.0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool all_passed() const;
  std::size_t family_count() const;
};

/// Runs the algebraic identity and oracle suite: linear-kernel HSIC vs
/// ||C||_F^2, the matrix-form estimator vs an index-sum expansion (linear and
/// RBF), centering properties, the squared-distance trace identity, analytic
/// vs finite-difference gradients, closed-form loss values, loss-vs-oracle
/// agreement and correlation bounds.
VerifyReport run_verification(const VerifyOptions& opts = {});

std::string format_report(const VerifyReport& report);
void write_report_csv(const VerifyReport& report, const std::filesystem::path& path);

}  // namespace hsicssl
