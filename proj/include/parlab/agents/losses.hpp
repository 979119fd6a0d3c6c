#pragma once

#include <span>

#include "parlab/numerics/matrix.hpp"

namespace parlab {

struct CriticLoss {
  double loss = 0.0;
  Vector dq1;
  Vector dq2;
};

/// 0.5 * (mean (q1 - y)^2 + mean (q2 - y)^2) and its gradients.
CriticLoss critic_loss(std::span<const double> q1, std::span<const double> q2,
                       std::span<const double> targets);

struct MatrixLoss {
  double loss = 0.0;
  Matrix grad;  // w.r.t. the first argument
};

/// mean_i ||pred_i - actions_i||^2
MatrixLoss bc_mse_loss(const Matrix& pred, const Matrix& actions);

struct GaussianLoss {
  double loss = 0.0;
  Matrix d_mean;
  Vector d_log_std;  // summed over rows
};

/// Per-row KL(N(mean, e^{2 log_std}) || N(b_mean, e^{2 b_log_std})) for diagonal Gaussians.
Vector gaussian_kl_rows(const Matrix& mean, std::span<const double> log_std,
                        const Matrix& b_mean, std::span<const double> b_log_std);
/// Mean KL over rows with gradients w.r.t. the first distribution.
GaussianLoss bc_kl_loss(const Matrix& mean, std::span<const double> log_std, const Matrix& b_mean,
                        std::span<const double> b_log_std);

/// mean_i -w_i log_probs_i. Weights must be positive and finite.
double bc_mle_loss(std::span<const double> log_probs, std::span<const double> weights);
/// bc_mle_loss for a diagonal Gaussian with gradients w.r.t. mean and log-std.
GaussianLoss weighted_nll(const Matrix& mean, std::span<const double> log_std,
                          const Matrix& actions, std::span<const double> weights);

/// w_i = exp(clip(A_i / temperature, -10, 10)).
Vector advantage_weights(std::span<const double> advantages, double temperature);

/// c / mean|q|, guarded against an all-zero batch.
double normalized_lambda(std::span<const double> q, double c);

}  // namespace parlab
