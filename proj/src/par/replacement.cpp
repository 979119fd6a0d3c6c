#include "parlab/par/replacement.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "parlab/errors.hpp"
#include "parlab/numerics/kernels.hpp"

namespace parlab {

namespace {

void copy_row(const Matrix& src, std::size_t from, Matrix& dst, std::size_t to) {
  std::copy(src.row(from).begin(), src.row(from).end(), dst.row(to).begin());
}

TrainingBatch select_rows(const TrainingBatch& batch, std::span<const std::size_t> rows,
                          std::size_t extra) {
  TrainingBatch out;
  const std::size_t n = rows.size() + extra;
  out.indices.resize(n, -1);
  out.states = Matrix(n, batch.states.cols());
  out.actions = Matrix(n, batch.actions.cols());
  out.next_states = Matrix(n, batch.next_states.cols());
  out.rewards.assign(n, 0.0);
  out.dones.assign(n, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    out.indices[i] = batch.indices[r];
    copy_row(batch.states, r, out.states, i);
    copy_row(batch.actions, r, out.actions, i);
    copy_row(batch.next_states, r, out.next_states, i);
    out.rewards[i] = batch.rewards[r];
    out.dones[i] = batch.dones[r];
  }
  return out;
}

void check_q(const TrainingBatch& batch, std::span<const double> q) {
  if (q.size() != batch.size()) {
    throw DimensionError("batch surgery: " + std::to_string(q.size()) + " Q-values for " +
                         std::to_string(batch.size()) + " rows");
  }
}

}  // namespace

bool gate(double l_critic, double l_sma, double beta, std::uint64_t t, std::uint64_t t_start) {
  return beta * l_sma > l_critic && t > t_start;
}

double replacement_ratio(std::uint64_t t, std::uint64_t t_start, std::uint64_t total, double p_min,
                         double p_max) {
  if (t < t_start || t > total) {
    spdlog::warn("replacement_ratio: step {} outside [{}, {}], clamped", t, t_start, total);
    return t < t_start ? p_min : p_max;
  }
  if (total == t_start) return p_max;
  const double frac = static_cast<double>(t - t_start) / static_cast<double>(total - t_start);
  return p_min + frac * (p_max - p_min);
}

std::size_t synthetic_count(double p, std::size_t n) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("replacement ratio must lie in [0, 1]");
  const double exact = p * static_cast<double>(n);
  return std::min(n, static_cast<std::size_t>(std::floor(exact + 1e-9)));
}

std::vector<std::size_t> sort_by_q_descending(std::span<const double> q) {
  std::vector<std::size_t> order(q.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return q[a] > q[b]; });
  return order;
}

HybridBatch build_hybrid_batch(const TrainingBatch& batch, std::span<const double> q_values,
                               const SyntheticBuffer& buffer, double p, Rng& rng) {
  check_q(batch, q_values);
  const std::size_t wanted = synthetic_count(p, batch.size());
  HybridBatch out;
  if (wanted == 0 || buffer.empty()) {
    out.batch = batch;
    out.n_real = batch.size();
    out.skipped = wanted > 0;
    return out;
  }
  out.n_syn = std::min(wanted, buffer.size());
  out.n_real = batch.size() - out.n_syn;
  std::vector<std::size_t> order = sort_by_q_descending(q_values);
  order.resize(out.n_real);
  out.batch = select_rows(batch, order, out.n_syn);
  const std::vector<std::size_t> picks = buffer.sample_positions(out.n_syn, rng);
  for (std::size_t j = 0; j < out.n_syn; ++j) {
    const std::size_t row = out.n_real + j;
    const auto s = buffer.state(picks[j]);
    const auto a = buffer.action(picks[j]);
    std::copy(s.begin(), s.end(), out.batch.states.row(row).begin());
    std::copy(a.begin(), a.end(), out.batch.actions.row(row).begin());
  }
  return out;
}

TrainingBatch filtering_batch(const TrainingBatch& batch, std::span<const double> q_values,
                              double p) {
  check_q(batch, q_values);
  const std::size_t drop = synthetic_count(p, batch.size());
  if (drop == 0) return batch;
  std::vector<std::size_t> order = sort_by_q_descending(q_values);
  order.resize(std::max<std::size_t>(batch.size() - drop, 1));
  return select_rows(batch, order, 0);
}

TrainingBatch nonproximal_batch(const TrainingBatch& batch, const Actor& live_actor,
                                std::uint64_t t, std::uint64_t switch_step) {
  if (t < switch_step) return batch;
  TrainingBatch out = batch;
  out.actions = live_actor.act(batch.states);
  return out;
}

double ema_update(double ema, double value, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("ema_update: alpha must lie in (0, 1]");
  return alpha * ema + (1.0 - alpha) * value;
}

void ema_update(std::span<double> ema, std::span<const double> value, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("ema_update: alpha must lie in (0, 1]");
  if (ema.size() != value.size()) throw DimensionError("ema_update: size mismatch");
  kernels::active().ema(ema.size(), alpha, value.data(), ema.data());
}

}  // namespace parlab
