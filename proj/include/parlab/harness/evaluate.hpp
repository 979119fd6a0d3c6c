#pragma once

#include <functional>

#include "parlab/agents/networks.hpp"
#include "parlab/env/environment.hpp"

namespace parlab {

struct EvalResult {
  double mean_return = 0.0;  // undiscounted
  double std_return = 0.0;
  double mean_distance = 0.0;  // mean ||action - a*(s)|| over every visited state
  std::size_t episodes = 0;
};

/// Maps a batch of states (one per row) to actions.
using Controller = std::function<Matrix(const Matrix& states)>;

/// Runs n_episodes in lockstep; throws std::invalid_argument when n_episodes is 0.
EvalResult evaluate_controller(const Controller& controller, const Environment& env,
                               std::size_t n_episodes, Rng& rng);

/// Deterministic rollouts of the actor (Gaussian actors use their mean).
EvalResult evaluate_policy(const Actor& actor, const Environment& env, std::size_t n_episodes,
                           Rng& rng);

Controller optimal_controller(const Environment& env);
Controller behavior_controller(const BehaviorPolicy& behavior, Rng& rng);

}  // namespace parlab
