#include "parlab/theory/stationarity.hpp"

#include <cmath>

#include "parlab/errors.hpp"

namespace parlab {

double bc_gradient_at_optimum(const OfflineDataset& data, std::span<const double> optimal_action) {
  const Vector mean = data.mean_action();
  if (optimal_action.size() != mean.size()) throw DimensionError("bc_gradient_at_optimum: action dim");
  double s = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double g = 2.0 * (optimal_action[i] - mean[i]);
    s += g * g;
  }
  return std::sqrt(s);
}

Vector stationarity_gradient(const Matrix& policy_actions, const Matrix& q_grads,
                             const Matrix& data_actions, double lambda) {
  require_same_shape(policy_actions, q_grads, "stationarity_gradient");
  require_same_shape(policy_actions, data_actions, "stationarity_gradient");
  const std::size_t n = policy_actions.rows();
  Vector g(policy_actions.cols(), 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t d = 0; d < g.size(); ++d) {
      g[d] += lambda * q_grads(r, d) - 2.0 * (policy_actions(r, d) - data_actions(r, d));
    }
  }
  for (double& v : g) v /= static_cast<double>(n);
  return g;
}

Vector stationarity_gradient(const Actor& actor, const TwinCritic& critic, const Matrix& states,
                             const Matrix& data_actions, double lambda) {
  const Matrix pi = actor.act(states);
  const TwinCritic::Eval eval = critic.evaluate(states, pi);
  const Matrix grads = critic.action_gradient_of_min(eval, Vector(states.rows(), 1.0));
  return stationarity_gradient(pi, grads, data_actions, lambda);
}

double stationarity_residual(const Matrix& policy_actions, const Matrix& q_grads,
                             const Matrix& data_actions, double lambda) {
  return std::sqrt(squared_norm(stationarity_gradient(policy_actions, q_grads, data_actions, lambda)));
}

double stationarity_residual(const Actor& actor, const TwinCritic& critic,
                             const OfflineDataset& data, double lambda) {
  return std::sqrt(
      squared_norm(stationarity_gradient(actor, critic, data.states(), data.actions(), lambda)));
}

}  // namespace parlab
