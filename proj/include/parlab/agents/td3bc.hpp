#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "parlab/agents/behavior.hpp"
#include "parlab/agents/networks.hpp"
#include "parlab/data/dataset.hpp"

namespace parlab {

enum class Regularizer { Mse, Kl, Mle };
enum class LambdaMode { Normalized, Fixed };

std::string_view to_string(Regularizer r);
Regularizer parse_regularizer(std::string_view s);
std::string_view to_string(LambdaMode m);
LambdaMode parse_lambda_mode(std::string_view s);

struct BackboneConfig {
  Regularizer regularizer = Regularizer::Mse;
  LambdaMode lambda_mode = LambdaMode::Normalized;
  double lambda = 2.5;  // c in c / mean|Q| (normalized) or lambda itself (fixed)
  double lr = 3e-4;
  std::size_t batch_size = 256;
  std::size_t total_steps = 10000;
  double gamma = 0.99;
  double target_alpha = 0.995;
  int actor_delay = 2;
  std::vector<std::size_t> hidden{256, 256};
  double mle_temperature = 1.0;
  int mle_samples = 4;
  double init_log_std = 0.0;
  BehaviorFitConfig behavior;  // KL regularizer only
  bool behavior_cotrain = true;

  bool operator==(const BackboneConfig&) const = default;
};

struct AgentDims {
  std::size_t state_dim = 1;
  std::size_t action_dim = 2;
  double action_bound = 0.0;  // 0 or infinity: unbounded actor output
};

/// Deterministic actor for the MSE regularizer, Gaussian for KL and MLE.
ActorSpec actor_spec_for(const AgentDims& dims, const BackboneConfig& config);

struct CriticStep {
  double loss = 0.0;
  Vector q_data;   // min-head Q(s, a_data) from the pre-update forward pass
  Vector targets;
};

struct ActorStep {
  double loss = 0.0;
  double bc_loss = 0.0;
  double q_term = 0.0;  // mean min-head Q at the actor's action (MSE/KL)
  double lambda = 0.0;
};

/// TD3+BC with a choice of BC regularizer. The EMA actor/critic serve both as
/// Bellman-target networks and as the slowly updated copies PAR draws from.
class Td3BcAgent {
 public:
  Td3BcAgent(const AgentDims& dims, const BackboneConfig& config, Rng& init_rng);

  const BackboneConfig& config() const noexcept { return config_; }
  const AgentDims& dims() const noexcept { return dims_; }

  /// y = r + gamma (1 - done) min-head Q_ema(s', pi_ema(s')).
  Vector critic_targets(const TrainingBatch& batch, std::uint64_t step) const;

  /// Computes critic gradients into the critic without stepping.
  CriticStep critic_gradients(const TrainingBatch& batch, std::uint64_t step);
  CriticStep update_critic(const TrainingBatch& batch, std::uint64_t step);

  /// Computes actor gradients (MSE/KL/MLE objective) without stepping. Noise for
  /// Gaussian actors is drawn from `noise_rng`.
  ActorStep actor_gradients(const TrainingBatch& batch, Rng& noise_rng, std::uint64_t step);
  ActorStep update_actor(const TrainingBatch& batch, Rng& noise_rng, std::uint64_t step);

  /// KL regularizer: one MLE step of the behavior estimate on the actor batch.
  double update_behavior(const TrainingBatch& batch);

  /// EMA of actor and critic with config().target_alpha.
  void update_targets();

  bool actor_step_due(std::uint64_t step) const {
    return config_.actor_delay <= 1 || step % static_cast<std::uint64_t>(config_.actor_delay) == 0;
  }

  /// Deterministic policy action (Gaussian mean).
  Matrix policy_action(const Matrix& states) const { return actor_.act(states); }
  /// Action proposed by the EMA actor: its output, or a sample for Gaussian actors.
  Matrix ema_action(const Matrix& states, Rng& rng) const;

  /// Fits the behavior estimate on the dataset (KL regularizer).
  void fit_behavior(const OfflineDataset& data, Rng& rng);

  /// FNV-1a over the raw bytes of every action matrix passed to the critic loss.
  std::uint64_t critic_action_checksum() const noexcept { return critic_checksum_; }

  Actor& actor() noexcept { return actor_; }
  const Actor& actor() const noexcept { return actor_; }
  const Actor& ema_actor() const noexcept { return ema_actor_; }
  Actor& ema_actor() noexcept { return ema_actor_; }
  TwinCritic& critic() noexcept { return critic_; }
  const TwinCritic& critic() const noexcept { return critic_; }
  const TwinCritic& ema_critic() const noexcept { return ema_critic_; }
  TwinCritic& ema_critic() noexcept { return ema_critic_; }
  const std::optional<BehaviorEstimate>& behavior() const noexcept { return behavior_; }
  ActorOptimizer& actor_optimizer() noexcept { return actor_opt_; }
  Adam& critic_optimizer(int head) noexcept { return critic_opt_[head]; }

 private:
  double lambda_for(std::span<const double> q) const;

  AgentDims dims_;
  BackboneConfig config_;
  Actor actor_;
  Actor ema_actor_;
  TwinCritic critic_;
  TwinCritic ema_critic_;
  ActorOptimizer actor_opt_;
  Adam critic_opt_[2];
  std::optional<BehaviorEstimate> behavior_;
  std::uint64_t critic_checksum_ = 0xcbf29ce484222325ULL;
};

}  // namespace parlab
