#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace parlab {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over one flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t param_count, AdamConfig config = {});

  /// Throws TrainingError (carrying the step about to be taken) on a non-finite
  /// gradient, before anything is modified.
  void step(std::span<double> params, std::span<const double> grads);

  const AdamConfig& config() const noexcept { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  std::uint64_t step_count() const noexcept { return t_; }
  std::span<const double> first_moment() const noexcept { return m_; }
  std::span<const double> second_moment() const noexcept { return v_; }

  /// Checkpoint restore.
  void restore(std::uint64_t t, std::vector<double> m, std::vector<double> v);

 private:
  AdamConfig config_;
  std::uint64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace parlab
