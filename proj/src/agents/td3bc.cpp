#include "parlab/agents/td3bc.hpp"

#include <cmath>
#include <algorithm>
#include <cstring>

#include "parlab/agents/losses.hpp"
#include "parlab/errors.hpp"

namespace parlab {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void require_finite(double v, const char* what, std::uint64_t step) {
  if (!std::isfinite(v)) throw TrainingError(std::string(what) + " is not finite", step);
}

}  // namespace

std::string_view to_string(Regularizer r) {
  switch (r) {
    case Regularizer::Mse: return "mse";
    case Regularizer::Kl: return "kl";
    case Regularizer::Mle: return "mle";
  }
  return "?";
}

Regularizer parse_regularizer(std::string_view s) {
  if (s == "mse") return Regularizer::Mse;
  if (s == "kl") return Regularizer::Kl;
  if (s == "mle") return Regularizer::Mle;
  throw ConfigError("unknown regularizer '" + std::string(s) + "' (expected mse, kl or mle)");
}

std::string_view to_string(LambdaMode m) { return m == LambdaMode::Fixed ? "fixed" : "normalized"; }

LambdaMode parse_lambda_mode(std::string_view s) {
  if (s == "fixed") return LambdaMode::Fixed;
  if (s == "normalized") return LambdaMode::Normalized;
  throw ConfigError("unknown lambda mode '" + std::string(s) + "' (expected fixed or normalized)");
}

ActorSpec actor_spec_for(const AgentDims& dims, const BackboneConfig& config) {
  ActorSpec spec;
  spec.kind = config.regularizer == Regularizer::Mse ? ActorKind::Deterministic : ActorKind::Gaussian;
  spec.state_dim = dims.state_dim;
  spec.action_dim = dims.action_dim;
  spec.hidden = config.hidden;
  spec.action_bound = dims.action_bound;
  spec.init_log_std = config.init_log_std;
  return spec;
}

Td3BcAgent::Td3BcAgent(const AgentDims& dims, const BackboneConfig& config, Rng& init_rng)
    : dims_(dims), config_(config) {
  actor_ = Actor(actor_spec_for(dims, config), init_rng);
  ema_actor_ = actor_;
  critic_ = TwinCritic(dims.state_dim, dims.action_dim, config.hidden, init_rng);
  ema_critic_ = critic_;
  const AdamConfig adam{.lr = config.lr};
  actor_opt_ = ActorOptimizer(actor_, adam);
  critic_opt_[0] = Adam(critic_.head(0).param_count(), adam);
  critic_opt_[1] = Adam(critic_.head(1).param_count(), adam);
}

double Td3BcAgent::lambda_for(std::span<const double> q) const {
  return config_.lambda_mode == LambdaMode::Fixed ? config_.lambda
                                                  : normalized_lambda(q, config_.lambda);
}

Vector Td3BcAgent::critic_targets(const TrainingBatch& batch, std::uint64_t step) const {
  Vector y = batch.rewards;
  bool all_terminal = true;
  for (double d : batch.dones) all_terminal = all_terminal && d != 0.0;
  if (!all_terminal && config_.gamma != 0.0) {
    const Matrix next_actions = ema_actor_.act(batch.next_states);
    const Vector q_next = ema_critic_.min_q(batch.next_states, next_actions);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] += config_.gamma * (1.0 - batch.dones[i]) * q_next[i];
    }
  }
  for (double v : y) require_finite(v, "critic target", step);
  return y;
}

CriticStep Td3BcAgent::critic_gradients(const TrainingBatch& batch, std::uint64_t step) {
  critic_checksum_ = fnv1a(critic_checksum_, batch.actions.data(), batch.actions.size() * sizeof(double));
  CriticStep out;
  out.targets = critic_targets(batch, step);
  const TwinCritic::Eval eval = critic_.evaluate(batch.states, batch.actions);
  const CriticLoss loss = critic_loss(eval.q1, eval.q2, out.targets);
  require_finite(loss.loss, "critic loss", step);
  critic_.zero_grad();
  critic_.backward(eval, loss.dq1, loss.dq2);
  out.loss = loss.loss;
  out.q_data = eval.q_min;
  return out;
}

CriticStep Td3BcAgent::update_critic(const TrainingBatch& batch, std::uint64_t step) {
  CriticStep out = critic_gradients(batch, step);
  for (int h = 0; h < 2; ++h) critic_opt_[h].step(critic_.head(h).params(), critic_.head(h).grads());
  return out;
}

ActorStep Td3BcAgent::actor_gradients(const TrainingBatch& batch, Rng& noise_rng,
                                      std::uint64_t step) {
  actor_.zero_grad();
  ActorStep out;
  const std::size_t n = batch.size();
  ForwardCache cache;
  const Matrix mean = actor_.act(batch.states, cache);

  if (config_.regularizer == Regularizer::Mse) {
    const TwinCritic::Eval eval = critic_.evaluate(batch.states, mean);
    out.lambda = lambda_for(eval.q_min);
    out.q_term = mean_of(eval.q_min);
    const Matrix dq = critic_.action_gradient_of_min(eval, Vector(n, -out.lambda / static_cast<double>(n)));
    MatrixLoss bc = bc_mse_loss(mean, batch.actions);
    for (std::size_t i = 0; i < bc.grad.size(); ++i) bc.grad.data()[i] += dq.data()[i];
    actor_.net().backward(cache, bc.grad);
    out.bc_loss = bc.loss;
    out.loss = -out.lambda * out.q_term + bc.loss;
  } else if (config_.regularizer == Regularizer::Kl) {
    if (!behavior_) throw UsageError("KL regularizer needs a fitted behavior estimate");
    const Vector ls = actor_.log_std();
    const Vector sd = actor_.std_dev();
    Matrix noise;
    const Matrix sampled = actor_.sample(mean, noise_rng, &noise);
    const TwinCritic::Eval eval = critic_.evaluate(batch.states, sampled);
    out.lambda = lambda_for(eval.q_min);
    out.q_term = mean_of(eval.q_min);
    const Matrix dq = critic_.action_gradient_of_min(eval, Vector(n, -out.lambda / static_cast<double>(n)));
    const Matrix b_mean = behavior_->policy().act(batch.states);
    const GaussianLoss kl = bc_kl_loss(mean, ls, b_mean, behavior_->policy().log_std());
    Matrix d_mean = kl.d_mean;
    Vector d_ls = kl.d_log_std;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t d = 0; d < mean.cols(); ++d) {
        d_mean(r, d) += dq(r, d);
        d_ls[d] += dq(r, d) * sd[d] * noise(r, d);
      }
    }
    actor_.net().backward(cache, d_mean);
    for (std::size_t d = 0; d < d_ls.size(); ++d) {
      if (actor_.log_std_active(d)) actor_.log_std_grad()[d] += d_ls[d];
    }
    out.bc_loss = kl.loss;
    out.loss = -out.lambda * out.q_term + kl.loss;
  } else {
    const std::size_t k = static_cast<std::size_t>(std::max(config_.mle_samples, 1));
    const Vector q_data = critic_.min_q(batch.states, batch.actions);
    Matrix rep_states(n * k, batch.states.cols());
    Matrix rep_mean(n * k, mean.cols());
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < k; ++j) {
        std::copy(batch.states.row(r).begin(), batch.states.row(r).end(), rep_states.row(r * k + j).begin());
        std::copy(mean.row(r).begin(), mean.row(r).end(), rep_mean.row(r * k + j).begin());
      }
    }
    const Vector q_samples = critic_.min_q(rep_states, actor_.sample(rep_mean, noise_rng));
    Vector adv(n);
    for (std::size_t r = 0; r < n; ++r) {
      double v = 0.0;
      for (std::size_t j = 0; j < k; ++j) v += q_samples[r * k + j];
      adv[r] = q_data[r] - v / static_cast<double>(k);
    }
    const Vector w = advantage_weights(adv, config_.mle_temperature);
    const GaussianLoss nll = weighted_nll(mean, actor_.log_std(), batch.actions, w);
    actor_.net().backward(cache, nll.d_mean);
    for (std::size_t d = 0; d < nll.d_log_std.size(); ++d) {
      if (actor_.log_std_active(d)) actor_.log_std_grad()[d] += nll.d_log_std[d];
    }
    out.q_term = mean_of(q_data);
    out.bc_loss = nll.loss;
    out.loss = nll.loss;
  }
  require_finite(out.loss, "actor loss", step);
  return out;
}

ActorStep Td3BcAgent::update_actor(const TrainingBatch& batch, Rng& noise_rng, std::uint64_t step) {
  ActorStep out = actor_gradients(batch, noise_rng, step);
  actor_opt_.step(actor_);
  return out;
}

double Td3BcAgent::update_behavior(const TrainingBatch& batch) {
  if (config_.regularizer != Regularizer::Kl || !config_.behavior_cotrain || !behavior_) return 0.0;
  return behavior_->mle_step(batch.states, batch.actions);
}

void Td3BcAgent::update_targets() {
  ema_actor_.ema_toward(actor_, config_.target_alpha);
  ema_critic_.ema_toward(critic_, config_.target_alpha);
}

Matrix Td3BcAgent::ema_action(const Matrix& states, Rng& rng) const {
  const Matrix out = ema_actor_.act(states);
  return ema_actor_.gaussian() ? ema_actor_.sample(out, rng) : out;
}

void Td3BcAgent::fit_behavior(const OfflineDataset& data, Rng& rng) {
  behavior_ = fit_behavior_policy(data, config_.behavior, dims_.action_bound, rng);
}

}  // namespace parlab
