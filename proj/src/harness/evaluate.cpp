#include "parlab/harness/evaluate.hpp"

#include <cmath>
#include <stdexcept>

#include "parlab/errors.hpp"

namespace parlab {

EvalResult evaluate_controller(const Controller& controller, const Environment& env,
                               std::size_t n_episodes, Rng& rng) {
  if (n_episodes == 0) throw std::invalid_argument("evaluate_policy: n_episodes must be positive");
  const std::size_t sd = env.state_dim();
  const std::size_t ad = env.action_dim();
  Matrix states(n_episodes, sd);
  for (std::size_t e = 0; e < n_episodes; ++e) {
    const Vector s = env.reset(rng);
    std::copy(s.begin(), s.end(), states.row(e).begin());
  }
  std::vector<double> returns(n_episodes, 0.0);
  std::vector<bool> active(n_episodes, true);
  double distance_sum = 0.0;
  std::size_t visits = 0;
  for (int t = 0; t < env.horizon(); ++t) {
    const Matrix actions = controller(states);
    if (actions.rows() != n_episodes || actions.cols() != ad) {
      throw DimensionError("evaluate_policy: controller returned " + actions.shape_string());
    }
    bool any = false;
    for (std::size_t e = 0; e < n_episodes; ++e) {
      if (!active[e]) continue;
      const auto s = states.row(e);
      const auto a = actions.row(e);
      const Vector best = env.optimal_action(s);
      double d2 = 0.0;
      for (std::size_t j = 0; j < ad; ++j) d2 += (a[j] - best[j]) * (a[j] - best[j]);
      distance_sum += std::sqrt(d2);
      ++visits;
      const StepResult r = env.step(s, a, t, rng);
      returns[e] += r.reward;
      std::copy(r.next_state.begin(), r.next_state.end(), states.row(e).begin());
      active[e] = !r.done;
      any = any || active[e];
    }
    if (!any) break;
  }
  EvalResult out;
  out.episodes = n_episodes;
  for (double r : returns) out.mean_return += r;
  out.mean_return /= static_cast<double>(n_episodes);
  double var = 0.0;
  for (double r : returns) var += (r - out.mean_return) * (r - out.mean_return);
  out.std_return = std::sqrt(var / static_cast<double>(n_episodes));
  out.mean_distance = distance_sum / static_cast<double>(visits);
  return out;
}

EvalResult evaluate_policy(const Actor& actor, const Environment& env, std::size_t n_episodes,
                           Rng& rng) {
  return evaluate_controller([&](const Matrix& s) { return actor.act(s); }, env, n_episodes, rng);
}

Controller optimal_controller(const Environment& env) {
  return [&env](const Matrix& states) {
    Matrix out(states.rows(), env.action_dim());
    for (std::size_t i = 0; i < states.rows(); ++i) {
      const Vector a = env.optimal_action(states.row(i));
      std::copy(a.begin(), a.end(), out.row(i).begin());
    }
    return out;
  };
}

Controller behavior_controller(const BehaviorPolicy& behavior, Rng& rng) {
  return [&behavior, &rng](const Matrix& states) {
    Matrix out(states.rows(), behavior.spec().center.size());
    for (std::size_t i = 0; i < states.rows(); ++i) {
      const Vector a = behavior.sample(states.row(i), rng);
      std::copy(a.begin(), a.end(), out.row(i).begin());
    }
    return out;
  };
}

}  // namespace parlab
