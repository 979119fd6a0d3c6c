#include "parlab/numerics/adam.hpp"

#include <cmath>

#include "parlab/errors.hpp"
#include "parlab/numerics/kernels.hpp"

namespace parlab {

Adam::Adam(std::size_t param_count, AdamConfig config)
    : config_(config), m_(param_count, 0.0), v_(param_count, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " params, " +
                         std::to_string(grads.size()) + " grads, state for " +
                         std::to_string(m_.size()));
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw TrainingError("adam_step: non-finite gradient at coordinate " + std::to_string(i),
                          t_ + 1);
    }
  }
  ++t_;
  const double td = static_cast<double>(t_);
  const kernels::AdamCoeffs c{config_.lr,
                              config_.beta1,
                              config_.beta2,
                              config_.eps,
                              1.0 - std::pow(config_.beta1, td),
                              1.0 - std::pow(config_.beta2, td)};
  kernels::active().adam(params.size(), params.data(), grads.data(), m_.data(), v_.data(), c);
}

void Adam::restore(std::uint64_t t, std::vector<double> m, std::vector<double> v) {
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw DimensionError("adam restore: moment size mismatch");
  }
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace parlab
