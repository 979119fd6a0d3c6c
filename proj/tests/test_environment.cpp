#include <gtest/gtest.h>

#include <cmath>

#include "parlab/env/environment.hpp"
#include "parlab/errors.hpp"
#include "parlab/harness/evaluate.hpp"

using namespace parlab;

TEST(Bandit, RewardExamples) {
  EXPECT_EQ(BanditEnv::reward(Vector{0.0, 0.0}), 0.0);
  EXPECT_EQ(BanditEnv::reward(Vector{2.0, 2.0}), -8.0);
  EXPECT_EQ(BanditEnv::reward(Vector{1.0, 0.0}), -1.0);
}

TEST(Bandit, RewardIsNonPositiveAndZeroOnlyAtOptimum) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Vector a{rng.normal(0, 3), rng.normal(0, 3)};
    EXPECT_LT(BanditEnv::reward(a), 0.0);
  }
  BanditEnv env;
  EXPECT_EQ(env.optimal_action(Vector{0.0}), (Vector{0.0, 0.0}));
  EXPECT_EQ(env.optimal_action(Vector{7.0}), (Vector{0.0, 0.0}));
}

TEST(Bandit, StepIsTerminalWithConstantState) {
  BanditEnv env;
  Rng rng(0);
  const Vector s = env.reset(rng);
  ASSERT_EQ(s, (Vector{0.0}));
  const StepResult r = env.step(s, Vector{1.0, 1.0}, 0, rng);
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.next_state, s);
  EXPECT_EQ(r.reward, -2.0);
}

TEST(PointMass, OriginWithZeroActionStays) {
  PointMassConfig cfg;
  cfg.noise_std = 0.0;
  PointMassEnv env(cfg);
  Rng rng(0);
  const StepResult r = env.step(Vector{0.0, 0.0}, Vector{0.0, 0.0}, 0, rng);
  EXPECT_EQ(r.next_state, (Vector{0.0, 0.0}));
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_FALSE(r.done);
}

TEST(PointMass, StateIsClippedToBounds) {
  PointMassConfig cfg;
  cfg.noise_std = 0.0;
  PointMassEnv env(cfg);
  Rng rng(0);
  const StepResult r = env.step(Vector{5.0, 5.0}, Vector{1.0, 1.0}, 0, rng);
  EXPECT_EQ(r.next_state, (Vector{5.0, 5.0}));
  EXPECT_EQ(r.reward, -2.0);
}

TEST(PointMass, DoneExactlyOnFiftiethStep) {
  PointMassEnv env;
  Rng rng(3);
  Vector s = env.reset(rng);
  for (int t = 0; t < 50; ++t) {
    const StepResult r = env.step(s, Vector{0.3, -0.2}, t, rng);
    EXPECT_EQ(r.done, t == 49) << "t = " << t;
    for (double v : r.next_state) EXPECT_LE(std::abs(v), 5.0);
    EXPECT_LE(r.reward, 0.0);
    EXPECT_GE(r.reward, -2.0);
    s = r.next_state;
  }
}

TEST(PointMass, ResetIsInsideInitialBox) {
  PointMassEnv env;
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    for (double v : env.reset(rng)) EXPECT_LE(std::abs(v), 4.0);
  }
}

TEST(PointMass, OptimalActionExamples) {
  PointMassEnv env;
  EXPECT_EQ(env.optimal_action(Vector{0.0, 0.0}), (Vector{0.0, 0.0}));
  EXPECT_EQ(env.optimal_action(Vector{3.0, -3.0}), (Vector{-1.0, 1.0}));
  const Vector small = env.optimal_action(Vector{0.05, -0.02});
  EXPECT_DOUBLE_EQ(small[0], -0.5);
  EXPECT_DOUBLE_EQ(small[1], 0.2);
}

TEST(PointMass, InvalidConfigRejected) {
  PointMassConfig cfg;
  cfg.horizon = 0;
  EXPECT_THROW(PointMassEnv{cfg}, ConfigError);
}

TEST(PointMass, OptimalControllerBeatsBehaviorOverHundredEpisodes) {
  PointMassEnv env;
  const BehaviorPolicy behavior(default_behavior(PointMassEnv::kName), env.action_bound());
  Rng rng_a(10), rng_b(10), rng_noise(11);
  const EvalResult opt = evaluate_controller(optimal_controller(env), env, 100, rng_a);
  const EvalResult beh = evaluate_controller(behavior_controller(behavior, rng_noise), env, 100, rng_b);
  EXPECT_GT(opt.mean_return, beh.mean_return);
  EXPECT_EQ(opt.mean_distance, 0.0);
}

TEST(Behavior, BanditSampleMeanNearCenterAcrossSeeds) {
  const BehaviorPolicy beta(default_behavior(BanditEnv::kName), BanditEnv().action_bound());
  double mx = 0.0, my = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    for (int i = 0; i < 10000; ++i) {
      const Vector a = beta.sample(Vector{0.0}, rng);
      mx += a[0];
      my += a[1];
    }
  }
  EXPECT_NEAR(mx / 50000, 2.0, 0.05);
  EXPECT_NEAR(my / 50000, 2.0, 0.05);
}

TEST(Behavior, ProportionalControllerClipsToBounds) {
  const BehaviorPolicy beta({BehaviorKind::Proportional, {2.0, 2.0}, 0.3, 1.0}, 1.0);
  Rng rng(0);
  for (int i = 0; i < 100; ++i) {
    for (double v : beta.sample(Vector{-4.0, 4.0}, rng)) EXPECT_LE(std::abs(v), 1.0);
  }
  EXPECT_EQ(beta.mean_action(Vector{1.5, 2.5}), (Vector{0.5, -0.5}));
}

TEST(Behavior, SpecRoundTripsThroughText) {
  const BehaviorSpec spec{BehaviorKind::Proportional, {2.0, -0.1}, 0.3, 1.25};
  EXPECT_EQ(spec.to_string(), "proportional center=2,-0.1 std=0.3 gain=1.25");
  EXPECT_EQ(BehaviorSpec::parse(spec.to_string()), spec);
  EXPECT_THROW(BehaviorSpec::parse("uniform center=0"), ConfigError);
  EXPECT_THROW(BehaviorSpec::parse("gaussian center=a,b"), ConfigError);
  EXPECT_THROW(BehaviorSpec::parse("gaussian std=-1"), ConfigError);
}

TEST(Environment, FactoryByName) {
  EXPECT_EQ(make_environment({"bandit2d", {}})->name(), "bandit2d");
  EXPECT_EQ(make_environment({"pointmass", {}})->name(), "pointmass");
  EXPECT_THROW(make_environment({"hopper", {}}), ConfigError);
}
