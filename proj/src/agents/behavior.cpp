#include "parlab/agents/behavior.hpp"

#include <algorithm>
#include <stdexcept>

#include "parlab/agents/losses.hpp"

namespace parlab {

BehaviorEstimate::BehaviorEstimate(const ActorSpec& spec, double lr, Rng& rng)
    : policy_(spec, rng), optimizer_(policy_, AdamConfig{.lr = lr}) {
  if (!policy_.gaussian()) throw std::invalid_argument("BehaviorEstimate: needs a Gaussian actor");
}

double BehaviorEstimate::compute_gradients(const Matrix& states, const Matrix& actions) {
  policy_.zero_grad();
  ForwardCache cache;
  const Matrix mean = policy_.act(states, cache);
  const Vector ls = policy_.log_std();
  const GaussianLoss nll = weighted_nll(mean, ls, actions, Vector(states.rows(), 1.0));
  policy_.net().backward(cache, nll.d_mean);
  for (std::size_t d = 0; d < ls.size(); ++d) {
    if (policy_.log_std_active(d)) policy_.log_std_grad()[d] += nll.d_log_std[d];
  }
  return nll.loss;
}

double BehaviorEstimate::mle_step(const Matrix& states, const Matrix& actions) {
  const double loss = compute_gradients(states, actions);
  optimizer_.step(policy_);
  return loss;
}

BehaviorEstimate fit_behavior_policy(const OfflineDataset& data, const BehaviorFitConfig& config,
                                     double action_bound, Rng& rng) {
  ActorSpec spec;
  spec.kind = ActorKind::Gaussian;
  spec.state_dim = data.state_dim();
  spec.action_dim = data.action_dim();
  spec.hidden = config.hidden;
  spec.action_bound = action_bound;
  BehaviorEstimate est(spec, config.lr, rng);
  const std::size_t batch = std::min(config.batch_size, data.size());
  for (std::size_t t = 0; t < config.steps; ++t) {
    const TrainingBatch b = sample_batch(data, batch, rng);
    est.mle_step(b.states, b.actions);
  }
  return est;
}

}  // namespace parlab
