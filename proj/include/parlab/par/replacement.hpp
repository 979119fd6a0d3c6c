#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "parlab/agents/networks.hpp"
#include "parlab/data/dataset.hpp"
#include "parlab/par/synthetic_buffer.hpp"

namespace parlab {

/// beta * l_sma > l_critic and t > t_start.
bool gate(double l_critic, double l_sma, double beta, std::uint64_t t, std::uint64_t t_start);

/// Linear schedule p_min -> p_max over [t_start, total]. Out-of-range t is
/// clamped to the endpoints with a warning.
double replacement_ratio(std::uint64_t t, std::uint64_t t_start, std::uint64_t total, double p_min,
                         double p_max);

/// floor(p * n), tolerant of p * n landing a rounding error below an integer.
std::size_t synthetic_count(double p, std::size_t n);

/// Batch positions ordered by descending q; ties keep their original order.
std::vector<std::size_t> sort_by_q_descending(std::span<const double> q);

struct HybridBatch {
  TrainingBatch batch;
  std::size_t n_real = 0;
  std::size_t n_syn = 0;
  bool skipped = false;  // replacement requested but the buffer was empty
};

/// Keeps the n_real highest-Q dataset rows (in descending-Q order) and appends
/// n_syn rows drawn without replacement from the buffer. n_syn = floor(p |B|),
/// capped at the buffer length with the shortfall backfilled by the next-best
/// real rows. Synthetic rows have index -1, zero reward, next-state and done.
HybridBatch build_hybrid_batch(const TrainingBatch& batch, std::span<const double> q_values,
                               const SyntheticBuffer& buffer, double p, Rng& rng);

/// Drops the floor(p |B|) lowest-Q rows (at least one row is always kept).
TrainingBatch filtering_batch(const TrainingBatch& batch, std::span<const double> q_values,
                              double p);

/// From `switch_step` on, every action is replaced with the live actor's action.
TrainingBatch nonproximal_batch(const TrainingBatch& batch, const Actor& live_actor,
                                std::uint64_t t, std::uint64_t switch_step);

/// alpha * ema + (1 - alpha) * value; alpha must lie in (0, 1].
double ema_update(double ema, double value, double alpha);
void ema_update(std::span<double> ema, std::span<const double> value, double alpha);

}  // namespace parlab
