#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "parlab/data/dataset.hpp"
#include "parlab/theory/bound.hpp"
#include "parlab/theory/discrete.hpp"
#include "parlab/theory/stationarity.hpp"

using namespace parlab;

namespace {

double sum(const Vector& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double max_q(const Vector& q) { return *std::max_element(q.begin(), q.end()); }

OfflineDataset bandit_with_actions(const Matrix& actions) {
  const std::size_t n = actions.rows();
  Vector rewards(n);
  for (std::size_t i = 0; i < n; ++i) rewards[i] = -squared_norm(actions.row(i));
  return OfflineDataset({"bandit2d", "manual", 0}, Matrix(n, 1), actions, rewards, Matrix(n, 1),
                        Vector(n, 1.0));
}

}  // namespace

TEST(BcGradientAtOptimum, Examples) {
  Matrix same(3, 2);
  for (std::size_t r = 0; r < 3; ++r) same(r, 0) = same(r, 1) = 0.0;
  EXPECT_EQ(bc_gradient_at_optimum(bandit_with_actions(same), Vector{0.0, 0.0}), 0.0);

  const Matrix centered(2, 2, std::vector<double>{1.0, 3.0, 3.0, 1.0});
  EXPECT_NEAR(bc_gradient_at_optimum(bandit_with_actions(centered), Vector{0.0, 0.0}),
              4.0 * std::numbers::sqrt2, 1e-12);

  Rng rng(0);
  const OfflineDataset d = generate_bandit_dataset(10000, default_behavior(BanditEnv::kName), rng);
  const Vector m = d.mean_action();
  const double oracle = 2.0 * std::hypot(m[0], m[1]);
  EXPECT_NEAR(bc_gradient_at_optimum(d, Vector{0.0, 0.0}), oracle, 1e-12);
  EXPECT_NEAR(oracle, 4.0 * std::numbers::sqrt2, 0.2);
}

TEST(Stationarity, Examples) {
  const Matrix data(2, 2, std::vector<double>{1.0, 3.0, 3.0, 1.0});
  const Matrix at_mean(2, 2, std::vector<double>{2.0, 2.0, 2.0, 2.0});
  const Matrix some_grads(2, 2, std::vector<double>{5.0, -1.0, 0.5, 7.0});
  EXPECT_NEAR(stationarity_residual(at_mean, some_grads, data, 0.0), 0.0, 1e-15);

  const Matrix pinned(2, 2);
  const Matrix flat(2, 2);
  EXPECT_GT(stationarity_residual(pinned, flat, data, 2.5), 1.0);
  EXPECT_NEAR(stationarity_residual(pinned, flat, data, 2.5), 4.0 * std::numbers::sqrt2, 1e-12);

  // Q = -||a||^2 has grad -2a; the fixed point is a = m / (1 + lambda)
  const double lambda = 2.5;
  const Matrix fixed(2, 2, std::vector<double>{2.0 / 3.5, 2.0 / 3.5, 2.0 / 3.5, 2.0 / 3.5});
  Matrix grads(2, 2);
  for (std::size_t i = 0; i < 4; ++i) grads.data()[i] = -2.0 * fixed.data()[i];
  EXPECT_NEAR(stationarity_residual(fixed, grads, data, lambda), 0.0, 1e-12);
  const Vector g = stationarity_gradient(pinned, flat, data, lambda);
  EXPECT_DOUBLE_EQ(g[0], 4.0);
  EXPECT_DOUBLE_EQ(g[1], 4.0);
}

TEST(Boltzmann, Examples) {
  DiscreteBandit uniform{Vector(4, 1.5), Vector(4, 0.25), {}};
  for (double p : boltzmann_policy(uniform)) EXPECT_NEAR(p, 0.25, 1e-15);

  const DiscreteBandit three{Vector{1.0, 0.0, 5.0}, Vector{0.5, 0.5, 0.0}, {}};
  const Vector p = boltzmann_policy(three);
  const double e = std::numbers::e;
  EXPECT_NEAR(p[0], e / (e + 1.0), 1e-12);
  EXPECT_NEAR(p[1], 1.0 / (e + 1.0), 1e-12);
  EXPECT_EQ(p[2], 0.0);
  EXPECT_LT(expected_q(p, three.q), max_q(three.q));
}

TEST(Boltzmann, NormalizedShiftInvariantAndSuboptimal) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const DiscreteBandit db = random_discrete_bandit(rng);
    const Vector p = boltzmann_policy(db);
    EXPECT_NEAR(sum(p), 1.0, 1e-12);
    DiscreteBandit shifted = db;
    for (double& q : shifted.q) q += 123.0;
    EXPECT_LT(max_abs_gap(boltzmann_policy(shifted), p), 1e-12);
    for (std::size_t a = 0; a < db.size(); ++a) {
      if (db.behavior[a] == 0.0) EXPECT_EQ(p[a], 0.0);
    }
    if (db.supports_suboptimal()) EXPECT_LT(expected_q(p, db.q), max_q(db.q));
  }
}

TEST(WeightedBehavior, Examples) {
  const DiscreteBandit unit{Vector{0.3, -1.0, 2.0}, Vector{0.2, 0.5, 0.3}, {}};
  EXPECT_LT(max_abs_gap(weighted_behavior_policy(unit), unit.behavior), 1e-15);

  const DiscreteBandit two{Vector{1.0, 0.0}, Vector{0.5, 0.5}, Vector{3.0, 1.0}};
  const Vector p = weighted_behavior_policy(two);
  EXPECT_DOUBLE_EQ(p[0], 0.75);
  EXPECT_DOUBLE_EQ(p[1], 0.25);

  const DiscreteBandit hidden{Vector{0.0, 1.0, 4.0}, Vector{0.6, 0.4, 0.0}, Vector{1.0, 2.0, 50.0}};
  const Vector h = weighted_behavior_policy(hidden);
  EXPECT_EQ(h[2], 0.0);
  EXPECT_LT(expected_q(h, hidden.q), max_q(hidden.q));
}

TEST(WeightedBehavior, ScaleInvariant) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    DiscreteBandit db = random_discrete_bandit(rng);
    const Vector p = weighted_behavior_policy(db);
    EXPECT_NEAR(sum(p), 1.0, 1e-12);
    for (double& w : db.weights) w *= 17.5;
    EXPECT_LT(max_abs_gap(weighted_behavior_policy(db), p), 1e-12);
  }
}

TEST(KlTraining, ConvergesToBoltzmann) {
  const DiscreteBandit constant{Vector(3, 0.7), Vector{0.2, 0.3, 0.5}, {}};
  EXPECT_LT(kl_training_matches_boltzmann(constant, 10000), 1e-6);
  const DiscreteBandit three{Vector{1.0, 0.0, 5.0}, Vector{0.5, 0.5, 0.0}, {}};
  EXPECT_LT(kl_training_matches_boltzmann(three, 10000), 0.01);
  EXPECT_LT(train_kl_tabular(three, 10000, 0.05)[2], 0.01);
}

TEST(KlTraining, RandomInstances) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const DiscreteBandit db = random_discrete_bandit(rng);
    EXPECT_LT(kl_training_matches_boltzmann(db, 20000), 0.01) << "instance " << i;
  }
}

TEST(WeightedMle, MatchesClosedFormLimit) {
  Rng rng(4);
  for (int i = 0; i < 5; ++i) {
    RandomBanditOptions o;
    o.hide_optimal = i % 2 == 1;
    const DiscreteBandit db = random_discrete_bandit(rng, o);
    const Vector fit = fit_weighted_mle(db, 200000, 20000, 0.5, rng);
    EXPECT_LT(max_abs_gap(fit, weighted_behavior_policy(db)), 0.02) << "instance " << i;
    if (o.hide_optimal) {
      const auto best = static_cast<std::size_t>(std::max_element(db.q.begin(), db.q.end()) - db.q.begin());
      EXPECT_LT(fit[best], 1e-3);
    }
  }
}

TEST(DiscreteBandit, Validation) {
  EXPECT_THROW((DiscreteBandit{Vector{1.0, 2.0}, Vector{0.5, 0.6}, {}}.validate()), std::invalid_argument);
  EXPECT_THROW((DiscreteBandit{Vector{1.0}, Vector{0.5, 0.5}, {}}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((DiscreteBandit{Vector{1.0, 2.0}, Vector{0.5, 0.5}, {}}.validate()));
}

TEST(DivergenceBound, IdenticalPoliciesGiveZeroRhs) {
  Rng rng(5);
  RandomBoundOptions o;
  o.policy_shift = 0.0;
  const BoundReport r = divergence_bound_report(random_bound_instance(rng, o));
  EXPECT_EQ(r.divergence, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
  EXPECT_GE(r.slack(), 0.0);
}

TEST(DivergenceBound, LinearCriticGivesZeroRhs) {
  Rng rng(6);
  RandomBoundOptions o;
  o.linear_critic = true;
  for (int i = 0; i < 20; ++i) {
    const BoundReport r = divergence_bound_report(random_bound_instance(rng, o));
    EXPECT_EQ(r.mu, 0.0);
    EXPECT_EQ(r.rhs, 0.0);
    EXPECT_GT(r.divergence, 0.0);
  }
}

TEST(DivergenceBound, HoldsOnRandomInstances) {
  Rng rng(7);
  double min_slack = 1e300;
  std::size_t positive_rhs = 0;
  for (int i = 0; i < 1000; ++i) {
    const BoundReport r = divergence_bound_report(random_bound_instance(rng));
    min_slack = std::min(min_slack, r.slack());
    positive_rhs += r.rhs > 0.0;
    EXPECT_NEAR(r.rhs, r.unscaled_rhs * 0.99 * 0.99, 1e-12 * (1.0 + r.unscaled_rhs));
  }
  EXPECT_GE(min_slack, -1e-9);
  EXPECT_GT(positive_rhs, 900u);
}

TEST(DivergenceBound, MinimumLossMatchesMonteCarlo) {
  Rng rng(8);
  RandomBoundOptions o;
  o.pairs = 5;
  o.action_dim = 2;
  const BoundInstance inst = random_bound_instance(rng, o);
  const BoundReport r = divergence_bound_report(inst);
  Rng mc(9);
  const double estimate = monte_carlo_min_loss(inst, 100000, mc);
  EXPECT_NEAR(estimate, r.lhs, 0.03 * r.lhs + 1e-6);
  EXPECT_GE(r.lhs, r.rhs);
}
