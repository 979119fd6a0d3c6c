#pragma once

#include "parlab/agents/networks.hpp"
#include "parlab/data/dataset.hpp"

namespace parlab {

struct BehaviorFitConfig {
  std::size_t steps = 2000;
  std::size_t batch_size = 256;
  double lr = 1e-3;
  std::vector<std::size_t> hidden{256, 256};

  bool operator==(const BehaviorFitConfig&) const = default;
};

/// Gaussian estimate of the data-generating policy, fitted by maximum likelihood.
class BehaviorEstimate {
 public:
  BehaviorEstimate() = default;
  BehaviorEstimate(const ActorSpec& spec, double lr, Rng& rng);

  /// One Adam step on mean -log pi(a|s); returns the loss before the step.
  double mle_step(const Matrix& states, const Matrix& actions);

  const Actor& policy() const noexcept { return policy_; }
  Actor& policy() noexcept { return policy_; }
  /// Gradients of mean -log pi(a|s) written into the policy (no step).
  double compute_gradients(const Matrix& states, const Matrix& actions);

  bool operator==(const BehaviorEstimate& o) const { return policy_ == o.policy_; }

 private:
  Actor policy_;
  ActorOptimizer optimizer_;
};

BehaviorEstimate fit_behavior_policy(const OfflineDataset& data, const BehaviorFitConfig& config,
                                     double action_bound, Rng& rng);

}  // namespace parlab
