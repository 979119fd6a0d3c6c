#pragma once

#include <vector>

#include "parlab/numerics/matrix.hpp"
#include "parlab/numerics/rng.hpp"

namespace parlab {

/// Finite instance for the critic-loss lower bound.
///
/// Each dataset pair (s, a) has reward r = reward_mean + reward_std * xi and a
/// discrete next-state distribution. The critic is uncertain: an ensemble of K
/// quadratic heads, drawn uniformly, all agreeing on the behavior action
///   Q_k(s', a) = v(s') + g_k(s')^T d + 0.5 d^T H_k(s') d,  d = a - pi_beta(s').
/// The target is y = r + gamma Q_k(s', pi_theta(s')).
struct BoundInstance {
  struct NextState {
    Vector behavior_action;
    Vector policy_action;
    double value = 0.0;
    std::vector<Vector> grads;     // g_k, one per ensemble head
    std::vector<Matrix> hessians;  // H_k (symmetric)
  };
  struct Pair {
    double reward_mean = 0.0;
    Vector next_probs;  // over next_states
  };

  std::size_t action_dim = 2;
  double gamma = 0.99;
  double reward_std = 0.0;
  std::vector<NextState> next_states;
  std::vector<Pair> pairs;

  std::size_t ensemble_size() const { return next_states.empty() ? 0 : next_states[0].grads.size(); }
  double q(std::size_t k, std::size_t j, std::span<const double> a) const;
  Vector grad_q(std::size_t k, std::size_t j, std::span<const double> a) const;
  void validate() const;
};

struct BoundReport {
  double lhs = 0.0;         // min_Q critic loss = E_(s,a) Var(y | s, a)
  double rhs = 0.0;         // gamma^2 * mu * divergence
  double mu = 0.0;          // min eigenvalue of Cov_k(grad_a Q_k) over states and probe points
  double divergence = 0.0;  // E ||pi_theta(s') - pi_beta(s')||^2
  double aleatoric = 0.0;   // E Var(r + gamma Q(s', pi_beta(s')) | s, a)
  double unscaled_rhs = 0.0;  // mu * divergence, without the gamma^2 factor

  double slack() const { return lhs - rhs; }
};

/// Exact bound terms. mu is the minimum over next states and `probe_points`
/// evenly spaced points on the segment [pi_beta(s'), pi_theta(s')] (endpoints
/// included). Throws std::runtime_error if a covariance fails a symmetry check.
BoundReport divergence_bound_report(const BoundInstance& inst, std::size_t probe_points = 33);

/// Monte-Carlo estimate of E_(s,a) Var(y | s, a) with `samples` draws per pair.
double monte_carlo_min_loss(const BoundInstance& inst, std::size_t samples, Rng& rng);

struct RandomBoundOptions {
  std::size_t pairs = 5;
  std::size_t next_states = 4;
  std::size_t action_dim = 2;
  std::size_t ensemble = 6;
  double gamma = 0.99;
  double policy_shift = 1.0;  // scale of pi_theta - pi_beta
  bool linear_critic = false;  // identical linear heads: Cov(grad) = 0
};

BoundInstance random_bound_instance(Rng& rng, const RandomBoundOptions& options = {});

}  // namespace parlab
