#include "parlab/data/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "parlab/errors.hpp"

namespace parlab {

namespace {

void append_le(std::vector<unsigned char>& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<unsigned char>(bits & 0xFF));
    bits >>= 8;
  }
}

}  // namespace

OfflineDataset::OfflineDataset(DatasetInfo info, Matrix states, Matrix actions, Vector rewards,
                               Matrix next_states, Vector dones)
    : info_(std::move(info)),
      states_(std::move(states)),
      actions_(std::move(actions)),
      rewards_(std::move(rewards)),
      next_states_(std::move(next_states)),
      dones_(std::move(dones)) {
  const std::size_t n = rewards_.size();
  if (n == 0) throw std::invalid_argument("OfflineDataset: empty dataset");
  if (states_.rows() != n || actions_.rows() != n || next_states_.rows() != n ||
      dones_.size() != n || next_states_.cols() != states_.cols()) {
    throw DimensionError("OfflineDataset: inconsistent column shapes");
  }
  auto finite = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(states_.values()) || !finite(actions_.values()) || !finite(rewards_) ||
      !finite(next_states_.values())) {
    throw std::invalid_argument("OfflineDataset: non-finite value");
  }
}

Transition OfflineDataset::at(std::size_t i) const {
  if (i >= size()) throw std::out_of_range("OfflineDataset::at");
  return {Vector(states_.row(i).begin(), states_.row(i).end()),
          Vector(actions_.row(i).begin(), actions_.row(i).end()), rewards_[i],
          Vector(next_states_.row(i).begin(), next_states_.row(i).end()), dones_[i] != 0.0};
}

Vector OfflineDataset::mean_action() const {
  Vector mean(action_dim(), 0.0);
  for (std::size_t r = 0; r < size(); ++r) {
    for (std::size_t c = 0; c < action_dim(); ++c) mean[c] += actions_(r, c);
  }
  for (double& m : mean) m /= static_cast<double>(size());
  return mean;
}

std::vector<unsigned char> OfflineDataset::payload() const {
  std::vector<unsigned char> out;
  out.reserve(size() * (2 * state_dim() + action_dim() + 2) * 8);
  for (std::size_t r = 0; r < size(); ++r) {
    for (double v : states_.row(r)) append_le(out, v);
    for (double v : actions_.row(r)) append_le(out, v);
    append_le(out, rewards_[r]);
    for (double v : next_states_.row(r)) append_le(out, v);
    append_le(out, dones_[r]);
  }
  return out;
}

std::uint32_t OfflineDataset::checksum() const {
  const auto bytes = payload();
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), bytes.data(), static_cast<uInt>(bytes.size())));
}

std::size_t TrainingBatch::synthetic_count() const {
  return static_cast<std::size_t>(std::count(indices.begin(), indices.end(), -1));
}

TrainingBatch gather_batch(const OfflineDataset& data, std::span<const std::size_t> indices) {
  TrainingBatch b;
  b.indices.assign(indices.begin(), indices.end());
  b.states = data.states().gather_rows(indices);
  b.actions = data.actions().gather_rows(indices);
  b.next_states = data.next_states().gather_rows(indices);
  b.rewards.resize(indices.size());
  b.dones.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    b.rewards[i] = data.rewards()[indices[i]];
    b.dones[i] = data.dones()[indices[i]];
  }
  return b;
}

TrainingBatch sample_batch(const OfflineDataset& data, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0 || batch_size > data.size()) {
    throw std::invalid_argument("sample_batch: batch size " + std::to_string(batch_size) +
                                " for dataset of " + std::to_string(data.size()));
  }
  std::vector<std::size_t> idx(batch_size);
  for (auto& i : idx) i = rng.index(data.size());
  return gather_batch(data, idx);
}

OfflineDataset generate_bandit_dataset(std::size_t n, const BehaviorSpec& behavior, Rng& rng,
                                       std::uint64_t seed_tag) {
  if (n == 0) throw std::invalid_argument("generate_bandit_dataset: n must be positive");
  const BanditEnv env;
  if (behavior.center.size() != env.action_dim()) {
    throw DimensionError("generate_bandit_dataset: behavior center must be 2-D");
  }
  const BehaviorPolicy policy(behavior, env.action_bound());
  Matrix states(n, 1, 0.0);
  Matrix actions(n, 2);
  Vector rewards(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector a = policy.sample(states.row(i), rng);
    std::copy(a.begin(), a.end(), actions.row(i).begin());
    rewards[i] = BanditEnv::reward(a);
  }
  Matrix next_states = states;
  return OfflineDataset({std::string(env.name()), behavior.to_string(), seed_tag},
                        std::move(states), std::move(actions), std::move(rewards),
                        std::move(next_states), Vector(n, 1.0));
}

OfflineDataset generate_mdp_dataset(const Environment& env, const BehaviorSpec& behavior,
                                    std::size_t episodes, Rng& rng, std::uint64_t seed_tag) {
  if (episodes == 0) throw std::invalid_argument("generate_mdp_dataset: episodes must be positive");
  if (behavior.center.size() != env.action_dim()) {
    throw DimensionError("generate_mdp_dataset: behavior center dimension mismatch");
  }
  const BehaviorPolicy policy(behavior, env.action_bound());
  const std::size_t horizon = static_cast<std::size_t>(env.horizon());
  const std::size_t n = episodes * horizon;
  Matrix states(n, env.state_dim());
  Matrix actions(n, env.action_dim());
  Matrix next_states(n, env.state_dim());
  Vector rewards(n);
  Vector dones(n);
  std::size_t row = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    Vector s = env.reset(rng);
    for (std::size_t t = 0; t < horizon; ++t, ++row) {
      const Vector a = policy.sample(s, rng);
      StepResult step = env.step(s, a, static_cast<int>(t), rng);
      std::copy(s.begin(), s.end(), states.row(row).begin());
      std::copy(a.begin(), a.end(), actions.row(row).begin());
      std::copy(step.next_state.begin(), step.next_state.end(), next_states.row(row).begin());
      rewards[row] = step.reward;
      dones[row] = step.done ? 1.0 : 0.0;
      s = std::move(step.next_state);
    }
  }
  return OfflineDataset({std::string(env.name()), behavior.to_string(), seed_tag},
                        std::move(states), std::move(actions), std::move(rewards),
                        std::move(next_states), std::move(dones));
}

}  // namespace parlab
