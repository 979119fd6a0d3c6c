#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "parlab/numerics/matrix.hpp"
#include "parlab/numerics/rng.hpp"

namespace parlab {

struct StepResult {
  Vector next_state;
  double reward = 0.0;
  bool done = false;
};

/// Environment with a known optimal action. Stepping is const; all randomness
/// comes from the caller's Rng.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  /// Symmetric per-coordinate action bound; infinity when unbounded.
  virtual double action_bound() const = 0;
  virtual int horizon() const = 0;
  virtual double gamma() const = 0;

  virtual Vector reset(Rng& rng) const = 0;
  /// `t` is the 0-based step index inside the episode.
  virtual StepResult step(std::span<const double> state, std::span<const double> action, int t,
                          Rng& rng) const = 0;
  virtual Vector optimal_action(std::span<const double> state) const = 0;
};

/// Stateless 2-D bandit, reward -||a||^2, optimum (0, 0). The state is a
/// constant 1-D zero vector and every transition is terminal.
class BanditEnv final : public Environment {
 public:
  static constexpr std::string_view kName = "bandit2d";

  std::string_view name() const override { return kName; }
  std::size_t state_dim() const override { return 1; }
  std::size_t action_dim() const override { return 2; }
  double action_bound() const override;
  int horizon() const override { return 1; }
  double gamma() const override { return 0.99; }

  Vector reset(Rng& rng) const override;
  StepResult step(std::span<const double> state, std::span<const double> action, int t,
                  Rng& rng) const override;
  Vector optimal_action(std::span<const double> state) const override;

  static double reward(std::span<const double> action);
};

struct PointMassConfig {
  std::size_t dim = 2;
  double state_bound = 5.0;
  double action_bound = 1.0;
  double init_bound = 4.0;
  double gain = 0.1;
  double noise_std = 0.01;
  int horizon = 50;
  double gamma = 0.99;

  bool operator==(const PointMassConfig&) const = default;
};

/// s' = clip(s + gain * clip(a) + noise), r = -||s||^2 / 25.
class PointMassEnv final : public Environment {
 public:
  static constexpr std::string_view kName = "pointmass";

  explicit PointMassEnv(PointMassConfig config = {});

  const PointMassConfig& config() const { return config_; }
  std::string_view name() const override { return kName; }
  std::size_t state_dim() const override { return config_.dim; }
  std::size_t action_dim() const override { return config_.dim; }
  double action_bound() const override { return config_.action_bound; }
  int horizon() const override { return config_.horizon; }
  double gamma() const override { return config_.gamma; }

  Vector reset(Rng& rng) const override;
  StepResult step(std::span<const double> state, std::span<const double> action, int t,
                  Rng& rng) const override;
  /// Full-speed move toward the origin: clip(-s / gain).
  Vector optimal_action(std::span<const double> state) const override;

  double reward(std::span<const double> state) const;

 private:
  PointMassConfig config_;
};

enum class BehaviorKind { Gaussian, Proportional };

/// Gaussian: a ~ N(center, std^2 I).
/// Proportional: a = clip(gain * (center - s) + std * xi) toward a biased target.
struct BehaviorSpec {
  BehaviorKind kind = BehaviorKind::Gaussian;
  Vector center{2.0, 2.0};
  double std = 1.0;
  double gain = 1.0;

  std::string to_string() const;
  static BehaviorSpec parse(std::string_view text);
  bool operator==(const BehaviorSpec&) const = default;
};

class BehaviorPolicy {
 public:
  BehaviorPolicy(BehaviorSpec spec, double action_bound);

  const BehaviorSpec& spec() const { return spec_; }
  Vector sample(std::span<const double> state, Rng& rng) const;
  /// Noise-free action.
  Vector mean_action(std::span<const double> state) const;

 private:
  BehaviorSpec spec_;
  double bound_;
};

struct EnvironmentOptions {
  std::string name = std::string(BanditEnv::kName);
  PointMassConfig pointmass;

  bool operator==(const EnvironmentOptions&) const = default;
};

/// "bandit2d" or "pointmass"; throws ConfigError otherwise.
std::unique_ptr<Environment> make_environment(const EnvironmentOptions& options);

/// Default behavior for an environment: N([2,2], I) for the bandit, a noisy
/// controller toward (2, 2) for the point-mass.
BehaviorSpec default_behavior(std::string_view env_name);

}  // namespace parlab
