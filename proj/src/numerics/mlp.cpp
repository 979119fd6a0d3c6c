#include "parlab/numerics/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "parlab/errors.hpp"
#include "parlab/numerics/kernels.hpp"

namespace parlab {

namespace {

Matrix transpose_block(const double* src, std::size_t rows, std::size_t cols) {
  Matrix t(cols, rows);
  double* dst = t.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * cols + c];
  }
  return t;
}

}  // namespace

MlpNet::MlpNet(MlpSpec spec, Rng& rng) : spec_(std::move(spec)) {
  if (spec_.input_dim == 0 || spec_.output_dim == 0) {
    throw DimensionError("MlpNet: input and output dimensions must be positive");
  }
  std::size_t in = spec_.input_dim;
  std::size_t offset = 0;
  auto add_layer = [&](std::size_t out) {
    layers_.push_back({in, out, offset, offset + in * out});
    offset += in * out + out;
    in = out;
  };
  for (std::size_t h : spec_.hidden) add_layer(h);
  add_layer(spec_.output_dim);

  params_.assign(offset, 0.0);
  grads_.assign(offset, 0.0);
  for (const Layer& l : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (std::size_t i = 0; i < l.in * l.out + l.out; ++i) {
      params_[l.w_offset + i] = rng.uniform(-bound, bound);
    }
  }
}

Matrix MlpNet::forward(const Matrix& x) const { return run_forward(x, nullptr); }

Matrix MlpNet::forward(const Matrix& x, ForwardCache& cache) const { return run_forward(x, &cache); }

Matrix MlpNet::run_forward(const Matrix& x, ForwardCache* cache) const {
  if (x.cols() != spec_.input_dim) {
    throw DimensionError("mlp_forward: input " + x.shape_string() + ", expected width " +
                         std::to_string(spec_.input_dim));
  }
  const auto& k = kernels::active();
  if (cache) {
    cache->layer_inputs.clear();
    cache->layer_inputs.reserve(layers_.size());
  }
  Matrix h = x;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const Layer& l = layers_[li];
    Matrix z(h.rows(), l.out);
    if (h.rows() > 0) {
      k.gemm(h.rows(), l.out, l.in, h.data(), l.in, params_.data() + l.w_offset, l.out, z.data(),
             l.out, false);
      k.add_bias_rows(z.rows(), l.out, params_.data() + l.b_offset, z.data());
    }
    const bool last = li + 1 == layers_.size();
    if (!last) {
      k.relu(z.size(), z.data());
    } else if (spec_.output == OutputActivation::ScaledTanh) {
      for (double& v : z.values()) v = spec_.output_scale * std::tanh(v);
    }
    if (cache) cache->layer_inputs.push_back(std::move(h));
    h = std::move(z);
  }
  if (cache) cache->output = h;
  return h;
}

Matrix MlpNet::backward(const ForwardCache& cache, const Matrix& output_grad) {
  return run_backward(cache, output_grad, grads_.data());
}

Matrix MlpNet::input_gradient(const ForwardCache& cache, const Matrix& output_grad) const {
  return run_backward(cache, output_grad, nullptr);
}

Matrix MlpNet::run_backward(const ForwardCache& cache, const Matrix& output_grad,
                            double* grad_sink) const {
  if (!cache.valid() || cache.layer_inputs.size() != layers_.size()) {
    throw UsageError("mlp_backward: no forward cache for this network");
  }
  const std::size_t batch = cache.output.rows();
  if (output_grad.rows() != batch || output_grad.cols() != spec_.output_dim) {
    throw DimensionError("mlp_backward: output gradient " + output_grad.shape_string() +
                         " vs output " + cache.output.shape_string());
  }
  const auto& k = kernels::active();
  Matrix g = output_grad;
  if (spec_.output == OutputActivation::ScaledTanh) {
    const double s = spec_.output_scale;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double t = cache.output.data()[i] / s;
      g.data()[i] *= s * (1.0 - t * t);
    }
  }
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& l = layers_[li];
    const Matrix& x = cache.layer_inputs[li];
    if (grad_sink && batch > 0) {
      const Matrix xt = x.transposed();
      k.gemm(l.in, l.out, batch, xt.data(), batch, g.data(), l.out, grad_sink + l.w_offset, l.out,
             true);
      k.column_sums(batch, l.out, g.data(), grad_sink + l.b_offset, true);
    }
    Matrix gx(batch, l.in);
    if (batch > 0) {
      const Matrix wt = transpose_block(params_.data() + l.w_offset, l.in, l.out);
      k.gemm(batch, l.in, l.out, g.data(), l.out, wt.data(), l.in, gx.data(), l.in, false);
    }
    if (li > 0) k.relu_backward(gx.size(), x.data(), gx.data());
    g = std::move(gx);
  }
  return g;
}

void MlpNet::zero_grad() { std::fill(grads_.begin(), grads_.end(), 0.0); }

std::span<double> MlpNet::weights(std::size_t layer) {
  const Layer& l = layers_.at(layer);
  return {params_.data() + l.w_offset, l.in * l.out};
}

std::span<double> MlpNet::bias(std::size_t layer) {
  const Layer& l = layers_.at(layer);
  return {params_.data() + l.b_offset, l.out};
}

std::span<const double> MlpNet::weights(std::size_t layer) const {
  const Layer& l = layers_.at(layer);
  return {params_.data() + l.w_offset, l.in * l.out};
}

std::span<const double> MlpNet::bias(std::size_t layer) const {
  const Layer& l = layers_.at(layer);
  return {params_.data() + l.b_offset, l.out};
}

std::vector<std::uint8_t> MlpNet::relu_pattern(const Matrix& x) const {
  ForwardCache cache;
  run_forward(x, &cache);
  std::vector<std::uint8_t> pattern;
  for (std::size_t li = 1; li < cache.layer_inputs.size(); ++li) {
    for (double v : cache.layer_inputs[li].values()) pattern.push_back(v > 0.0 ? 1 : 0);
  }
  return pattern;
}

}  // namespace parlab
