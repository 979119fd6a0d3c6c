#include "parlab/par/replacer.hpp"

#include "parlab/par/replacement.hpp"

namespace parlab {

ParReplacer::ParReplacer(const ParConfig& config, std::size_t state_dim, std::size_t action_dim)
    : config_(config), buffer_(config.capacity, state_dim, action_dim) {
  config_.validate();
}

bool ParReplacer::evaluate_gate(double l_critic, std::uint64_t t) {
  if (!l_sma_) l_sma_ = l_critic;
  const bool open = gate(l_critic, *l_sma_, config_.beta, t, config_.t_start);
  if (open) ++gate_count_;
  return open;
}

TrainingBatch ParReplacer::actor_batch(const TrainingBatch& batch, const Vector& q_data,
                                       bool gate_open, std::uint64_t t, const Proposer& propose,
                                       const Actor& live_actor, Rng& rng,
                                       ReplacementRecord& record) {
  record = ReplacementRecord{};
  record.gate = gate_open;
  record.n_real = batch.size();
  switch (config_.mode) {
    case ParMode::Off:
      return batch;
    case ParMode::NonProximal:
      if (t >= config_.nonproximal_switch_step) {
        record.n_syn = batch.size();
        record.n_real = 0;
        record.p = 1.0;
      }
      return nonproximal_batch(batch, live_actor, t, config_.nonproximal_switch_step);
    case ParMode::Filtering: {
      if (!gate_open) return batch;
      record.p = replacement_ratio(t, config_.t_start, config_.total_steps, config_.p_min,
                                   config_.p_max);
      TrainingBatch out = filtering_batch(batch, q_data, record.p);
      record.n_real = out.size();
      record.n_syn = batch.size() - out.size();
      return out;
    }
    case ParMode::Par: {
      if (!gate_open) return batch;
      buffer_.push(batch.states, propose(batch.states));
      record.p = replacement_ratio(t, config_.t_start, config_.total_steps, config_.p_min,
                                   config_.p_max);
      HybridBatch hybrid = build_hybrid_batch(batch, q_data, buffer_, record.p, rng);
      record.n_real = hybrid.n_real;
      record.n_syn = hybrid.n_syn;
      record.skipped = hybrid.skipped;
      if (hybrid.skipped) ++skipped_;
      return std::move(hybrid.batch);
    }
  }
  return batch;
}

void ParReplacer::end_step(double l_critic) {
  l_sma_ = l_sma_ ? ema_update(*l_sma_, l_critic, config_.alpha) : l_critic;
}

}  // namespace parlab
