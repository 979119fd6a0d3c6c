#include "parlab/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "parlab/errors.hpp"
#include "parlab/numerics/rng.hpp"

namespace parlab {

GradCheckResult grad_check(std::span<double> params, std::span<const double> analytic,
                           const std::function<double()>& loss,
                           const std::function<std::vector<std::uint8_t>()>& signature,
                           const GradCheckOptions& options) {
  if (!(options.epsilon > 0.0) || !std::isfinite(options.epsilon)) {
    throw std::invalid_argument("grad_check: epsilon must be positive and finite");
  }
  if (params.size() != analytic.size()) {
    throw DimensionError("grad_check: parameter/gradient size mismatch");
  }
  std::vector<std::size_t> coords(params.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (coords.size() > options.samples) {
    Rng rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng.engine());
    coords.resize(options.samples);
  }

  const std::vector<std::uint8_t> base = signature ? signature() : std::vector<std::uint8_t>{};
  GradCheckResult result;
  const double eps = options.epsilon;
  for (std::size_t i : coords) {
    const double saved = params[i];
    params[i] = saved + eps;
    const double up = loss();
    const bool kink_up = signature && signature() != base;
    params[i] = saved - eps;
    const double down = loss();
    const bool kink_down = signature && signature() != base;
    params[i] = saved;
    if (kink_up || kink_down) {
      ++result.skipped_kinks;
      continue;
    }
    const double numeric = (up - down) / (2.0 * eps);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
    result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
    ++result.checked;
  }
  return result;
}

GradCheckResult grad_check(MlpNet& net, const Matrix& inputs, const OutputLoss& loss,
                           const GradCheckOptions& options) {
  ForwardCache cache;
  const Matrix out = net.forward(inputs, cache);
  Matrix dout(out.rows(), out.cols());
  loss(out, &dout);
  net.zero_grad();
  net.backward(cache, dout);
  const std::vector<double> analytic(net.grads().begin(), net.grads().end());
  return grad_check(
      net.params(), analytic, [&] { return loss(net.forward(inputs), nullptr); },
      [&] { return net.relu_pattern(inputs); }, options);
}

}  // namespace parlab
