#pragma once

#include <cstdint>

#include "parlab/numerics/matrix.hpp"
#include "parlab/numerics/rng.hpp"

namespace parlab {

/// Single-state bandit with a finite action set.
struct DiscreteBandit {
  Vector q;
  Vector behavior;  // pi_beta, sums to 1
  Vector weights;   // optional; empty means unit weights

  std::size_t size() const noexcept { return q.size(); }
  /// Throws std::invalid_argument unless sizes agree, q is finite and behavior
  /// is a probability vector within 1e-12.
  void validate() const;
  /// Some action with positive behavior mass has Q below the maximum.
  bool supports_suboptimal() const;
};

/// pi(a) proportional to pi_beta(a) exp(Q(a)); the maximizer of
/// E_pi[Q] - KL(pi || pi_beta). Zero-support actions stay exactly zero.
Vector boltzmann_policy(const DiscreteBandit& db);

/// pi(a) proportional to w(a) pi_beta(a); the limit of weighted MLE.
Vector weighted_behavior_policy(const DiscreteBandit& db);

double expected_q(const Vector& policy, const Vector& q);
double max_abs_gap(const Vector& a, const Vector& b);

/// Softmax-logit gradient ascent on sum_a pi(a) (Q(a) - log pi(a) + log pi_beta(a)),
/// from uniform logits. log 0 is floored at log(DBL_MIN).
Vector train_kl_tabular(const DiscreteBandit& db, std::size_t steps, double lr);

/// max_a |train_kl_tabular(db) - boltzmann_policy(db)|.
double kl_training_matches_boltzmann(const DiscreteBandit& db, std::size_t steps, double lr = 0.05);

/// Draws `samples` actions from pi_beta, then fits softmax logits by gradient
/// ascent on the mean weighted log-likelihood of those samples.
Vector fit_weighted_mle(const DiscreteBandit& db, std::size_t samples, std::size_t steps,
                        double lr, Rng& rng);

struct RandomBanditOptions {
  std::size_t min_actions = 2;
  std::size_t max_actions = 16;
  double q_range = 3.0;
  double zero_support_prob = 0.3;  // chance that each non-anchor action gets no behavior mass
  bool hide_optimal = false;       // force pi_beta(argmax Q) = 0
};

/// Random instance with Q ~ U(-q_range, q_range) and at least two supported
/// actions; weights exp(Q - max Q).
DiscreteBandit random_discrete_bandit(Rng& rng, const RandomBanditOptions& options = {});

}  // namespace parlab
