#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace parlab {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;      // worst observed statistic
  double threshold = 0.0;  // pass boundary for `value`
  std::string detail;
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<VerifyCheck> checks;

  bool passed() const;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t kl_instances = 50;
  std::size_t kl_steps = 20000;
  double kl_lr = 0.05;
  std::size_t mle_instances = 20;
  std::size_t mle_samples = 200000;
  std::size_t mle_steps = 20000;
  double mle_lr = 0.5;
  std::size_t bound_instances = 1000;
  std::size_t linear_instances = 100;
};

/// Closed-form oracles for the discrete KL and weighted-MLE limits, the
/// divergence bound on the critic loss and the BC gradient at the optimum.
VerifyReport run_verify(const VerifyOptions& options = {});
void write_verify_report(const VerifyReport& report, const std::filesystem::path& path);

}  // namespace parlab
