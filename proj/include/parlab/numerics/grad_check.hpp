#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "parlab/numerics/matrix.hpp"
#include "parlab/numerics/mlp.hpp"

namespace parlab {

struct GradCheckOptions {
  double epsilon = 1e-5;
  std::size_t samples = 64;  // coordinates checked; all of them if fewer exist
  std::uint64_t seed = 0;
  double floor = 1e-6;  // denominator floor for near-zero gradients
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;  // perturbation crossed a ReLU boundary
};

/// Central-difference check of `analytic` against loss() over a random subset of
/// `params`. loss() must read the current contents of params. When `signature`
/// is given, coordinates whose perturbation changes it are skipped.
GradCheckResult grad_check(std::span<double> params, std::span<const double> analytic,
                           const std::function<double()>& loss,
                           const std::function<std::vector<std::uint8_t>()>& signature,
                           const GradCheckOptions& options = {});

/// Scalar loss of a network output; fills dL/d(output) when grad is non-null.
using OutputLoss = std::function<double(const Matrix& output, Matrix* grad)>;

/// Checks MlpNet::backward for loss(net(inputs)). Leaves the net's parameters as
/// they were; grads() is overwritten.
GradCheckResult grad_check(MlpNet& net, const Matrix& inputs, const OutputLoss& loss,
                           const GradCheckOptions& options = {});

}  // namespace parlab
