#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "parlab/env/environment.hpp"
#include "parlab/numerics/matrix.hpp"
#include "parlab/numerics/rng.hpp"

namespace parlab {

struct Transition {
  Vector state;
  Vector action;
  double reward = 0.0;
  Vector next_state;
  bool done = false;
};

struct DatasetInfo {
  std::string env_name;
  std::string behavior;  // BehaviorSpec::to_string()
  std::uint64_t seed = 0;

  bool operator==(const DatasetInfo&) const = default;
};

/// Immutable offline dataset stored column-wise for cheap batch gathering.
class OfflineDataset {
 public:
  OfflineDataset(DatasetInfo info, Matrix states, Matrix actions, Vector rewards,
                 Matrix next_states, Vector dones);

  const DatasetInfo& info() const noexcept { return info_; }
  std::size_t size() const noexcept { return rewards_.size(); }
  std::size_t state_dim() const noexcept { return states_.cols(); }
  std::size_t action_dim() const noexcept { return actions_.cols(); }

  const Matrix& states() const noexcept { return states_; }
  const Matrix& actions() const noexcept { return actions_; }
  const Vector& rewards() const noexcept { return rewards_; }
  const Matrix& next_states() const noexcept { return next_states_; }
  const Vector& dones() const noexcept { return dones_; }  // 1.0 terminal, 0.0 otherwise

  Transition at(std::size_t i) const;
  Vector mean_action() const;
  /// CRC-32 of the little-endian row payload (the same bytes the file stores).
  std::uint32_t checksum() const;
  /// Serialized row payload: per row s, a, r, s', done as little-endian doubles.
  std::vector<unsigned char> payload() const;

  bool operator==(const OfflineDataset&) const = default;

 private:
  DatasetInfo info_;
  Matrix states_;
  Matrix actions_;
  Vector rewards_;
  Matrix next_states_;
  Vector dones_;
};

/// Actor/critic mini-batch. Rows drawn from the dataset carry their index;
/// synthetic rows (from PAR's buffer) carry -1 and zero reward/next-state.
struct TrainingBatch {
  std::vector<std::int64_t> indices;
  Matrix states;
  Matrix actions;
  Vector rewards;
  Matrix next_states;
  Vector dones;

  std::size_t size() const noexcept { return indices.size(); }
  std::size_t synthetic_count() const;
  bool operator==(const TrainingBatch&) const = default;
};

TrainingBatch gather_batch(const OfflineDataset& data, std::span<const std::size_t> indices);
/// Uniform with replacement. Throws std::invalid_argument if batch_size exceeds the dataset.
TrainingBatch sample_batch(const OfflineDataset& data, std::size_t batch_size, Rng& rng);

/// n terminal transitions with the bandit's constant state.
OfflineDataset generate_bandit_dataset(std::size_t n, const BehaviorSpec& behavior, Rng& rng,
                                       std::uint64_t seed_tag = 0);
/// Behavior rollouts of full episodes; done marks the last step of each.
OfflineDataset generate_mdp_dataset(const Environment& env, const BehaviorSpec& behavior,
                                    std::size_t episodes, Rng& rng, std::uint64_t seed_tag = 0);

}  // namespace parlab
