#include "parlab/agents/networks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "parlab/errors.hpp"
#include "parlab/numerics/kernels.hpp"

namespace parlab {

namespace {

MlpSpec actor_net_spec(const ActorSpec& spec) {
  MlpSpec m;
  m.input_dim = spec.state_dim;
  m.output_dim = spec.action_dim;
  m.hidden = spec.hidden;
  if (spec.action_bound > 0.0 && std::isfinite(spec.action_bound)) {
    m.output = OutputActivation::ScaledTanh;
    m.output_scale = spec.action_bound;
  }
  return m;
}

void ema_span(std::span<double> avg, std::span<const double> value, double alpha) {
  if (avg.size() != value.size()) throw DimensionError("ema: parameter size mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("ema: alpha must lie in [0, 1]");
  kernels::active().ema(avg.size(), alpha, value.data(), avg.data());
}

Vector column(const Matrix& m) {
  return Vector(m.values().begin(), m.values().end());
}

}  // namespace

Actor::Actor(const ActorSpec& spec, Rng& rng) : spec_(spec), net_(actor_net_spec(spec), rng) {
  if (gaussian()) {
    log_std_.assign(spec.action_dim, spec.init_log_std);
    log_std_grad_.assign(spec.action_dim, 0.0);
  }
}

Vector Actor::log_std() const {
  Vector out(log_std_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(log_std_[i], kLogStdMin, kLogStdMax);
  return out;
}

Vector Actor::std_dev() const {
  Vector out = log_std();
  for (double& v : out) v = std::exp(v);
  return out;
}

bool Actor::log_std_active(std::size_t i) const {
  return log_std_[i] > kLogStdMin && log_std_[i] < kLogStdMax;
}

Vector Actor::log_prob(const Matrix& mean, const Matrix& actions) const {
  if (!gaussian()) throw UsageError("log_prob: deterministic actor has no density");
  require_same_shape(mean, actions, "log_prob");
  if (mean.cols() != spec_.action_dim) throw DimensionError("log_prob: action width");
  const Vector ls = log_std();
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  Vector out(mean.rows(), 0.0);
  for (std::size_t r = 0; r < mean.rows(); ++r) {
    double lp = 0.0;
    for (std::size_t d = 0; d < mean.cols(); ++d) {
      const double z = (actions(r, d) - mean(r, d)) * std::exp(-ls[d]);
      lp += -0.5 * z * z - ls[d] - half_log_2pi;
    }
    out[r] = lp;
  }
  return out;
}

Matrix Actor::sample(const Matrix& mean, Rng& rng, Matrix* noise_out) const {
  if (!gaussian()) throw UsageError("sample: deterministic actor");
  const Vector sd = std_dev();
  Matrix out = mean;
  Matrix noise(mean.rows(), mean.cols());
  for (std::size_t r = 0; r < mean.rows(); ++r) {
    for (std::size_t d = 0; d < mean.cols(); ++d) {
      noise(r, d) = rng.normal();
      out(r, d) += sd[d] * noise(r, d);
    }
  }
  if (noise_out) *noise_out = std::move(noise);
  return out;
}

void Actor::zero_grad() {
  net_.zero_grad();
  std::fill(log_std_grad_.begin(), log_std_grad_.end(), 0.0);
}

std::vector<ParamBlock> Actor::blocks() {
  std::vector<ParamBlock> out{net_.block("actor.net")};
  if (gaussian()) out.push_back({"actor.log_std", log_std_, log_std_grad_});
  return out;
}

std::vector<double> Actor::flat_params() const {
  std::vector<double> out(net_.params().begin(), net_.params().end());
  out.insert(out.end(), log_std_.begin(), log_std_.end());
  return out;
}

void Actor::set_flat_params(std::span<const double> flat) {
  if (flat.size() != param_count()) throw DimensionError("Actor::set_flat_params: size mismatch");
  auto p = net_.params();
  std::copy_n(flat.begin(), p.size(), p.begin());
  std::copy(flat.begin() + static_cast<std::ptrdiff_t>(p.size()), flat.end(), log_std_.begin());
}

void Actor::ema_toward(const Actor& other, double alpha) {
  ema_span(net_.params(), other.net_.params(), alpha);
  ema_span(log_std_, other.log_std_, alpha);
}

ActorOptimizer::ActorOptimizer(const Actor& actor, AdamConfig config)
    : net_(actor.net().param_count(), config),
      log_std_(actor.gaussian() ? actor.action_dim() : 0, config) {}

void ActorOptimizer::step(Actor& actor) {
  net_.step(actor.net().params(), actor.net().grads());
  if (actor.gaussian()) log_std_.step(actor.raw_log_std(), actor.log_std_grad());
}

TwinCritic::TwinCritic(std::size_t state_dim, std::size_t action_dim,
                       const std::vector<std::size_t>& hidden, Rng& rng)
    : state_dim_(state_dim), action_dim_(action_dim) {
  MlpSpec spec;
  spec.input_dim = state_dim + action_dim;
  spec.output_dim = 1;
  spec.hidden = hidden;
  q1_ = MlpNet(spec, rng);
  q2_ = MlpNet(spec, rng);
}

TwinCritic::Eval TwinCritic::evaluate(const Matrix& states, const Matrix& actions) const {
  if (states.cols() != state_dim_ || actions.cols() != action_dim_) {
    throw DimensionError("critic: states " + states.shape_string() + ", actions " +
                         actions.shape_string());
  }
  Eval e;
  e.input = hconcat(states, actions);
  e.q1 = column(q1_.forward(e.input, e.cache1));
  e.q2 = column(q2_.forward(e.input, e.cache2));
  e.q_min.resize(e.q1.size());
  for (std::size_t i = 0; i < e.q1.size(); ++i) e.q_min[i] = std::min(e.q1[i], e.q2[i]);
  return e;
}

Vector TwinCritic::min_q(const Matrix& states, const Matrix& actions) const {
  if (states.cols() != state_dim_ || actions.cols() != action_dim_) {
    throw DimensionError("critic: states " + states.shape_string() + ", actions " +
                         actions.shape_string());
  }
  const Matrix input = hconcat(states, actions);
  const Matrix a = q1_.forward(input);
  const Matrix b = q2_.forward(input);
  Vector out(a.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(a(i, 0), b(i, 0));
  return out;
}

void TwinCritic::backward(const Eval& eval, std::span<const double> dq1,
                          std::span<const double> dq2) {
  const std::size_t n = eval.q1.size();
  if (dq1.size() != n || dq2.size() != n) throw DimensionError("critic backward: gradient length");
  q1_.backward(eval.cache1, Matrix(n, 1, Vector(dq1.begin(), dq1.end())));
  q2_.backward(eval.cache2, Matrix(n, 1, Vector(dq2.begin(), dq2.end())));
}

Matrix TwinCritic::action_gradient_of_min(const Eval& eval, std::span<const double> g) const {
  const std::size_t n = eval.q1.size();
  if (g.size() != n) throw DimensionError("critic action gradient: length");
  Matrix g1(n, 1), g2(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (eval.q1[i] <= eval.q2[i]) {
      g1(i, 0) = g[i];
    } else {
      g2(i, 0) = g[i];
    }
  }
  const Matrix d1 = q1_.input_gradient(eval.cache1, g1);
  const Matrix d2 = q2_.input_gradient(eval.cache2, g2);
  Matrix out(n, action_dim_);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < action_dim_; ++d) {
      out(i, d) = d1(i, state_dim_ + d) + d2(i, state_dim_ + d);
    }
  }
  return out;
}

void TwinCritic::zero_grad() {
  q1_.zero_grad();
  q2_.zero_grad();
}

void TwinCritic::ema_toward(const TwinCritic& other, double alpha) {
  ema_span(q1_.params(), other.q1_.params(), alpha);
  ema_span(q2_.params(), other.q2_.params(), alpha);
}

}  // namespace parlab
