#include "parlab/agents/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "parlab/errors.hpp"

namespace parlab {

CriticLoss critic_loss(std::span<const double> q1, std::span<const double> q2,
                       std::span<const double> targets) {
  const std::size_t n = targets.size();
  if (q1.size() != n || q2.size() != n) throw DimensionError("critic_loss: length mismatch");
  if (n == 0) throw std::invalid_argument("critic_loss: empty batch");
  CriticLoss out;
  out.dq1.resize(n);
  out.dq2.resize(n);
  const double inv = 1.0 / static_cast<double>(n);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e1 = q1[i] - targets[i];
    const double e2 = q2[i] - targets[i];
    s1 += e1 * e1;
    s2 += e2 * e2;
    out.dq1[i] = e1 * inv;
    out.dq2[i] = e2 * inv;
  }
  out.loss = 0.5 * (s1 * inv + s2 * inv);
  return out;
}

MatrixLoss bc_mse_loss(const Matrix& pred, const Matrix& actions) {
  require_same_shape(pred, actions, "bc_mse_loss");
  if (pred.rows() == 0) throw std::invalid_argument("bc_mse_loss: empty batch");
  MatrixLoss out{0.0, Matrix(pred.rows(), pred.cols())};
  const double inv = 1.0 / static_cast<double>(pred.rows());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - actions.data()[i];
    sum += d * d;
    out.grad.data()[i] = 2.0 * d * inv;
  }
  out.loss = sum * inv;
  return out;
}

Vector gaussian_kl_rows(const Matrix& mean, std::span<const double> log_std,
                        const Matrix& b_mean, std::span<const double> b_log_std) {
  require_same_shape(mean, b_mean, "gaussian_kl");
  if (log_std.size() != mean.cols() || b_log_std.size() != mean.cols()) {
    throw DimensionError("gaussian_kl: log-std width");
  }
  Vector out(mean.rows(), 0.0);
  for (std::size_t r = 0; r < mean.rows(); ++r) {
    double kl = 0.0;
    for (std::size_t d = 0; d < mean.cols(); ++d) {
      const double var = std::exp(2.0 * log_std[d]);
      const double b_var = std::exp(2.0 * b_log_std[d]);
      const double diff = mean(r, d) - b_mean(r, d);
      kl += b_log_std[d] - log_std[d] + (var + diff * diff) / (2.0 * b_var) - 0.5;
    }
    out[r] = kl;
  }
  return out;
}

GaussianLoss bc_kl_loss(const Matrix& mean, std::span<const double> log_std, const Matrix& b_mean,
                        std::span<const double> b_log_std) {
  const Vector rows = gaussian_kl_rows(mean, log_std, b_mean, b_log_std);
  if (rows.empty()) throw std::invalid_argument("bc_kl_loss: empty batch");
  const double inv = 1.0 / static_cast<double>(rows.size());
  GaussianLoss out;
  for (double v : rows) out.loss += v;
  out.loss *= inv;
  out.d_mean = Matrix(mean.rows(), mean.cols());
  out.d_log_std.assign(mean.cols(), 0.0);
  for (std::size_t d = 0; d < mean.cols(); ++d) {
    const double b_var = std::exp(2.0 * b_log_std[d]);
    const double var = std::exp(2.0 * log_std[d]);
    for (std::size_t r = 0; r < mean.rows(); ++r) {
      out.d_mean(r, d) = (mean(r, d) - b_mean(r, d)) / b_var * inv;
    }
    out.d_log_std[d] = var / b_var - 1.0;
  }
  return out;
}

namespace {

void check_weights(std::span<const double> weights) {
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("bc_mle_loss: weights must be positive and finite");
    }
  }
}

}  // namespace

double bc_mle_loss(std::span<const double> log_probs, std::span<const double> weights) {
  if (log_probs.size() != weights.size()) throw DimensionError("bc_mle_loss: length mismatch");
  if (log_probs.empty()) throw std::invalid_argument("bc_mle_loss: empty batch");
  check_weights(weights);
  double sum = 0.0;
  for (std::size_t i = 0; i < log_probs.size(); ++i) sum += -weights[i] * log_probs[i];
  return sum / static_cast<double>(log_probs.size());
}

GaussianLoss weighted_nll(const Matrix& mean, std::span<const double> log_std,
                          const Matrix& actions, std::span<const double> weights) {
  require_same_shape(mean, actions, "weighted_nll");
  if (weights.size() != mean.rows()) throw DimensionError("weighted_nll: weight length");
  if (log_std.size() != mean.cols()) throw DimensionError("weighted_nll: log-std width");
  if (mean.rows() == 0) throw std::invalid_argument("weighted_nll: empty batch");
  check_weights(weights);
  const double inv = 1.0 / static_cast<double>(mean.rows());
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  GaussianLoss out;
  out.d_mean = Matrix(mean.rows(), mean.cols());
  out.d_log_std.assign(mean.cols(), 0.0);
  for (std::size_t r = 0; r < mean.rows(); ++r) {
    double lp = 0.0;
    for (std::size_t d = 0; d < mean.cols(); ++d) {
      const double inv_std = std::exp(-log_std[d]);
      const double z = (actions(r, d) - mean(r, d)) * inv_std;
      lp += -0.5 * z * z - log_std[d] - half_log_2pi;
      out.d_mean(r, d) = -weights[r] * z * inv_std * inv;
      out.d_log_std[d] += -weights[r] * (z * z - 1.0) * inv;
    }
    out.loss += -weights[r] * lp * inv;
  }
  return out;
}

Vector advantage_weights(std::span<const double> advantages, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("advantage_weights: temperature must be > 0");
  Vector w(advantages.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(std::clamp(advantages[i] / temperature, -10.0, 10.0));
  }
  return w;
}

double normalized_lambda(std::span<const double> q, double c) {
  if (q.empty()) throw std::invalid_argument("normalized_lambda: empty batch");
  double s = 0.0;
  for (double v : q) s += std::abs(v);
  const double mean_abs = s / static_cast<double>(q.size());
  return c / std::max(mean_abs, 1e-12);
}

}  // namespace parlab
