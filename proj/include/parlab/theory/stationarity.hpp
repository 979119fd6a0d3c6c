#pragma once

#include "parlab/agents/networks.hpp"
#include "parlab/data/dataset.hpp"

namespace parlab {

/// ||2 (a* - mean dataset action)||: output-space MSE-BC gradient of a policy
/// pinned at the optimum.
double bc_gradient_at_optimum(const OfflineDataset& data, std::span<const double> optimal_action);

/// mean_i (lambda grad_a Q(s_i, pi_i) - 2 (pi_i - a_i)) for explicit policy
/// actions and critic action-gradients at them.
Vector stationarity_gradient(const Matrix& policy_actions, const Matrix& q_grads,
                             const Matrix& data_actions, double lambda);
/// Same with pi = actor(states) and grad_a of the min-head critic.
Vector stationarity_gradient(const Actor& actor, const TwinCritic& critic, const Matrix& states,
                             const Matrix& data_actions, double lambda);
/// Norm of stationarity_gradient.
double stationarity_residual(const Matrix& policy_actions, const Matrix& q_grads,
                             const Matrix& data_actions, double lambda);

/// Same, with pi = actor(s) and grad_a of the min-head critic, over all dataset rows.
double stationarity_residual(const Actor& actor, const TwinCritic& critic,
                             const OfflineDataset& data, double lambda);

}  // namespace parlab
