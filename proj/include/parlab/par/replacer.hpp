#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "parlab/agents/networks.hpp"
#include "parlab/data/dataset.hpp"
#include "parlab/par/config.hpp"
#include "parlab/par/synthetic_buffer.hpp"

namespace parlab {

struct ReplacementRecord {
  bool gate = false;
  double p = 0.0;
  std::size_t n_real = 0;
  std::size_t n_syn = 0;  // synthetic (PAR) or dropped (Filtering) rows
  bool skipped = false;
};

/// Runtime state of the batch replacer: smoothed critic loss, synthetic FIFO
/// and event counters. One instance per training run.
class ParReplacer {
 public:
  /// Produces the slowly updated actor's actions for a batch of states.
  using Proposer = std::function<Matrix(const Matrix& states)>;

  ParReplacer(const ParConfig& config, std::size_t state_dim, std::size_t action_dim);

  const ParConfig& config() const noexcept { return config_; }

  /// Gate decision for this step's critic loss against the previous smoothed
  /// loss. The smoothed loss is seeded with the first critic loss seen.
  bool evaluate_gate(double l_critic, std::uint64_t t);

  /// Builds the actor batch for step t according to the mode. `gate_open` is the
  /// value returned by evaluate_gate for this step.
  TrainingBatch actor_batch(const TrainingBatch& batch, const Vector& q_data, bool gate_open,
                            std::uint64_t t, const Proposer& propose, const Actor& live_actor,
                            Rng& rng, ReplacementRecord& record);

  /// L_sma <- alpha L_sma + (1 - alpha) l_critic. Called once per step after the updates.
  void end_step(double l_critic);

  std::optional<double> l_sma() const noexcept { return l_sma_; }
  const SyntheticBuffer& buffer() const noexcept { return buffer_; }
  std::uint64_t skipped_events() const noexcept { return skipped_; }
  std::uint64_t gate_events() const noexcept { return gate_count_; }

 private:
  ParConfig config_;
  SyntheticBuffer buffer_;
  std::optional<double> l_sma_;
  std::uint64_t skipped_ = 0;
  std::uint64_t gate_count_ = 0;
};

}  // namespace parlab
