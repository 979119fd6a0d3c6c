#pragma once

#include <span>
#include <vector>

#include "parlab/numerics/adam.hpp"
#include "parlab/numerics/matrix.hpp"
#include "parlab/numerics/mlp.hpp"
#include "parlab/numerics/rng.hpp"

namespace parlab {

enum class ActorKind { Deterministic, Gaussian };

struct ActorSpec {
  ActorKind kind = ActorKind::Deterministic;
  std::size_t state_dim = 1;
  std::size_t action_dim = 2;
  std::vector<std::size_t> hidden{256, 256};
  double action_bound = 0.0;  // > 0 and finite: tanh-scaled output; otherwise unbounded
  double init_log_std = 0.0;

  bool operator==(const ActorSpec&) const = default;
};

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

/// Deterministic policy s -> a, or diagonal Gaussian whose mean is the network
/// output and whose log-std is a learned state-independent vector clamped to
/// [kLogStdMin, kLogStdMax].
class Actor {
 public:
  Actor() = default;
  Actor(const ActorSpec& spec, Rng& rng);

  const ActorSpec& spec() const noexcept { return spec_; }
  bool gaussian() const noexcept { return spec_.kind == ActorKind::Gaussian; }
  std::size_t action_dim() const noexcept { return spec_.action_dim; }

  /// Deterministic action, or the Gaussian mean.
  Matrix act(const Matrix& states) const { return net_.forward(states); }
  Matrix act(const Matrix& states, ForwardCache& cache) const { return net_.forward(states, cache); }

  /// Clamped log-std (Gaussian only).
  Vector log_std() const;
  Vector std_dev() const;
  /// Whether the raw log-std coordinate lies inside the clamp (gradient passes).
  bool log_std_active(std::size_t i) const;

  /// Per-row log density of `actions` under N(mean, diag(std^2)).
  Vector log_prob(const Matrix& mean, const Matrix& actions) const;
  /// mean + std * noise, noise ~ N(0, I) drawn row-major from rng.
  Matrix sample(const Matrix& mean, Rng& rng, Matrix* noise_out = nullptr) const;

  MlpNet& net() noexcept { return net_; }
  const MlpNet& net() const noexcept { return net_; }
  std::span<double> raw_log_std() noexcept { return log_std_; }
  std::span<const double> raw_log_std() const noexcept { return log_std_; }
  std::span<double> log_std_grad() noexcept { return log_std_grad_; }

  void zero_grad();
  std::vector<ParamBlock> blocks();
  std::size_t param_count() const noexcept { return net_.param_count() + log_std_.size(); }
  /// All parameters concatenated (net first, then log-std).
  std::vector<double> flat_params() const;
  void set_flat_params(std::span<const double> flat);

  /// this = alpha * this + (1 - alpha) * other
  void ema_toward(const Actor& other, double alpha);

  bool operator==(const Actor&) const = default;

 private:
  ActorSpec spec_;
  MlpNet net_;
  std::vector<double> log_std_;
  std::vector<double> log_std_grad_;
};

/// Adam state for an actor: one optimizer per parameter block.
class ActorOptimizer {
 public:
  ActorOptimizer() = default;
  ActorOptimizer(const Actor& actor, AdamConfig config);
  void step(Actor& actor);
  std::uint64_t step_count() const noexcept { return net_.step_count(); }
  Adam& net_adam() noexcept { return net_; }
  Adam& log_std_adam() noexcept { return log_std_; }

 private:
  Adam net_;
  Adam log_std_;
};

/// Two independent Q(s, a) heads on the concatenated input [s | a].
class TwinCritic {
 public:
  struct Eval {
    Matrix input;
    Vector q1, q2, q_min;
    ForwardCache cache1, cache2;
  };

  TwinCritic() = default;
  TwinCritic(std::size_t state_dim, std::size_t action_dim, const std::vector<std::size_t>& hidden,
             Rng& rng);

  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t action_dim() const noexcept { return action_dim_; }

  Eval evaluate(const Matrix& states, const Matrix& actions) const;
  /// Element-wise minimum over the heads.
  Vector min_q(const Matrix& states, const Matrix& actions) const;

  /// Accumulates parameter gradients for dL/dq1, dL/dq2 (length-batch vectors).
  void backward(const Eval& eval, std::span<const double> dq1, std::span<const double> dq2);
  /// d/da of sum_i g_i * q_min_i, routed through the head that attains the minimum.
  Matrix action_gradient_of_min(const Eval& eval, std::span<const double> g) const;

  MlpNet& head(int i) { return i == 0 ? q1_ : q2_; }
  const MlpNet& head(int i) const { return i == 0 ? q1_ : q2_; }
  void zero_grad();
  void ema_toward(const TwinCritic& other, double alpha);

  bool operator==(const TwinCritic&) const = default;

 private:
  std::size_t state_dim_ = 0;
  std::size_t action_dim_ = 0;
  MlpNet q1_;
  MlpNet q2_;
};

}  // namespace parlab
