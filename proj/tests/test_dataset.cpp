#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "parlab/data/dataset.hpp"
#include "parlab/data/dataset_io.hpp"
#include "parlab/errors.hpp"

using namespace parlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "parlab_test_dataset";
  fs::create_directories(dir);
  return dir / name;
}

OfflineDataset small_bandit(std::uint64_t seed, std::size_t n = 100) {
  Rng rng(seed);
  return generate_bandit_dataset(n, default_behavior(BanditEnv::kName), rng, seed);
}

}  // namespace

TEST(BanditDataset, ShapesAndRewards) {
  const OfflineDataset d = small_bandit(0, 500);
  ASSERT_EQ(d.size(), 500u);
  EXPECT_EQ(d.state_dim(), 1u);
  EXPECT_EQ(d.action_dim(), 2u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Transition t = d.at(i);
    EXPECT_EQ(t.state, (Vector{0.0}));
    EXPECT_EQ(t.next_state, (Vector{0.0}));
    EXPECT_TRUE(t.done);
    EXPECT_DOUBLE_EQ(t.reward, BanditEnv::reward(t.action));
  }
  EXPECT_EQ(d.info().env_name, "bandit2d");
}

TEST(BanditDataset, ZeroSizeRejected) {
  Rng rng(0);
  EXPECT_THROW(generate_bandit_dataset(0, default_behavior(BanditEnv::kName), rng),
               std::invalid_argument);
}

TEST(BanditDataset, ZeroStdGivesConstantActions) {
  BehaviorSpec spec = default_behavior(BanditEnv::kName);
  spec.std = 0.0;
  Rng rng(4);
  const OfflineDataset d = generate_bandit_dataset(50, spec, rng);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d.at(i).action, (Vector{2.0, 2.0}));
    EXPECT_EQ(d.rewards()[i], -8.0);
  }
}

TEST(BanditDataset, DeterministicPerSeed) {
  EXPECT_EQ(small_bandit(7), small_bandit(7));
  EXPECT_EQ(small_bandit(7).checksum(), small_bandit(7).checksum());
  EXPECT_NE(small_bandit(7).actions(), small_bandit(8).actions());
}

TEST(BanditDataset, MeanActionNearBehaviorCenter) {
  const Vector m = small_bandit(2, 20000).mean_action();
  EXPECT_NEAR(m[0], 2.0, 0.05);
  EXPECT_NEAR(m[1], 2.0, 0.05);
}

TEST(MdpDataset, OneEpisodeIsOneHorizon) {
  PointMassEnv env;
  Rng rng(0);
  const OfflineDataset d =
      generate_mdp_dataset(env, default_behavior(PointMassEnv::kName), 1, rng);
  ASSERT_EQ(d.size(), 50u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d.dones()[i], i == 49 ? 1.0 : 0.0);
    if (i > 0) EXPECT_EQ(d.at(i).state, d.at(i - 1).next_state);
    EXPECT_DOUBLE_EQ(d.rewards()[i], env.reward(d.at(i).state));
    for (double a : d.at(i).action) EXPECT_LE(std::abs(a), 1.0);
  }
}

TEST(MdpDataset, EpisodeCountAndErrors) {
  PointMassEnv env;
  Rng rng(1);
  EXPECT_EQ(generate_mdp_dataset(env, default_behavior(PointMassEnv::kName), 4, rng).size(), 200u);
  EXPECT_THROW(generate_mdp_dataset(env, default_behavior(PointMassEnv::kName), 0, rng),
               std::invalid_argument);
  const BehaviorSpec one_dim{BehaviorKind::Gaussian, {1.0}, 1.0, 1.0};
  EXPECT_THROW(generate_mdp_dataset(env, one_dim, 1, rng), DimensionError);
}

TEST(Sampling, BatchRowsMatchDataset) {
  const OfflineDataset d = small_bandit(3, 64);
  Rng rng(9);
  const TrainingBatch b = sample_batch(d, 32, rng);
  ASSERT_EQ(b.size(), 32u);
  EXPECT_EQ(b.synthetic_count(), 0u);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto k = static_cast<std::size_t>(b.indices[i]);
    ASSERT_LT(k, d.size());
    const Transition t = d.at(k);
    EXPECT_EQ(Vector(b.actions.row(i).begin(), b.actions.row(i).end()), t.action);
    EXPECT_EQ(b.rewards[i], t.reward);
  }
}

TEST(Sampling, BatchSizeValidated) {
  const OfflineDataset d = small_bandit(3, 10);
  Rng rng(0);
  EXPECT_THROW(sample_batch(d, 0, rng), std::invalid_argument);
  EXPECT_THROW(sample_batch(d, 11, rng), std::invalid_argument);
  EXPECT_THROW(d.at(10), std::out_of_range);
}

TEST(Sampling, BatchIsACopy) {
  const OfflineDataset d = small_bandit(3, 10);
  const OfflineDataset before = d;
  Rng rng(0);
  TrainingBatch b = sample_batch(d, 5, rng);
  for (std::size_t i = 0; i < b.actions.size(); ++i) b.actions.data()[i] = 99.0;
  EXPECT_EQ(d, before);
}

TEST(Sampling, IndicesAreUniform) {
  const OfflineDataset d = small_bandit(0, 10);
  Rng rng(21);
  std::vector<double> counts(10, 0.0);
  const int draws = 2000;
  for (int i = 0; i < draws; ++i) {
    for (auto k : sample_batch(d, 10, rng).indices) counts[static_cast<std::size_t>(k)] += 1.0;
  }
  const double expected = draws;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 27.88);  // 9 dof, p = 0.001
}

TEST(DatasetIo, RoundTripIsExact) {
  const OfflineDataset d = small_bandit(5, 300);
  const fs::path p = scratch("roundtrip.bin");
  save_dataset(d, p);
  EXPECT_EQ(load_dataset(p), d);

  PointMassEnv env;
  Rng rng(2);
  const OfflineDataset m = generate_mdp_dataset(env, default_behavior(PointMassEnv::kName), 3, rng, 2);
  save_dataset(m, p);
  EXPECT_EQ(load_dataset(p), m);
}

TEST(DatasetIo, DistinctErrors) {
  EXPECT_THROW(load_dataset(scratch("does_not_exist.bin")), DatasetMissingError);

  const fs::path p = scratch("bad.bin");
  save_dataset(small_bandit(1, 20), p);
  std::string bytes;
  {
    std::ifstream f(p, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  }
  auto write = [&](const std::string& content) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << content;
  };

  write(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_dataset(p), DatasetChecksumError);

  std::string flipped = bytes;
  flipped[flipped.size() - 1] ^= 0x01;
  write(flipped);
  EXPECT_THROW(load_dataset(p), DatasetChecksumError);

  std::string versioned = bytes;
  versioned[4] = 9;
  write(versioned);
  EXPECT_THROW(load_dataset(p), DatasetVersionError);

  write("nope, not a dataset");
  EXPECT_THROW(load_dataset(p), DatasetFormatError);
}

TEST(DatasetIo, CsvHeaderAndRows) {
  const OfflineDataset d = small_bandit(0, 4);
  const fs::path p = scratch("data.csv");
  export_dataset_csv(d, p);
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "s0,a0,a1,r,ns0,done");
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  EXPECT_EQ(rows, 4);
}
