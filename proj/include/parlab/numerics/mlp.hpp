#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "parlab/numerics/matrix.hpp"
#include "parlab/numerics/rng.hpp"

namespace parlab {

/// A named slice of trainable parameters together with its gradient buffer.
/// Optimizers, EMA copies, checkpoints and gradient checks all work on blocks.
struct ParamBlock {
  std::string_view name;
  std::span<double> values;
  std::span<double> grads;
};

enum class OutputActivation { Identity, ScaledTanh };

struct MlpSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::vector<std::size_t> hidden{256, 256};
  OutputActivation output = OutputActivation::Identity;
  double output_scale = 1.0;  // ScaledTanh: y = scale * tanh(z)

  bool operator==(const MlpSpec&) const = default;
};

/// Activations recorded by a forward pass, consumed by backward.
struct ForwardCache {
  std::vector<Matrix> layer_inputs;  // input to each dense layer; hidden ones post-ReLU
  Matrix output;

  bool valid() const noexcept { return !layer_inputs.empty(); }
  void clear() {
    layer_inputs.clear();
    output = Matrix();
  }
};

/// Fully connected network: ReLU hidden layers, identity or scaled-tanh output.
/// Weights of layer l are stored (in x out) row-major, followed by the bias, in
/// one contiguous parameter vector.
class MlpNet {
 public:
  MlpNet() = default;
  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation for weights and biases.
  MlpNet(MlpSpec spec, Rng& rng);

  const MlpSpec& spec() const noexcept { return spec_; }
  std::size_t input_dim() const noexcept { return spec_.input_dim; }
  std::size_t output_dim() const noexcept { return spec_.output_dim; }
  std::size_t param_count() const noexcept { return params_.size(); }
  std::size_t layer_count() const noexcept { return layers_.size(); }

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, ForwardCache& cache) const;

  /// Backpropagates dL/d(output) through the cached pass. Parameter gradients are
  /// accumulated into grads(); the gradient w.r.t. the input is returned.
  Matrix backward(const ForwardCache& cache, const Matrix& output_grad);
  /// Same as backward() but leaves grads() untouched.
  Matrix input_gradient(const ForwardCache& cache, const Matrix& output_grad) const;

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }
  std::span<double> grads() noexcept { return grads_; }
  std::span<const double> grads() const noexcept { return grads_; }
  void zero_grad();
  ParamBlock block(std::string_view name) { return {name, params_, grads_}; }

  std::span<double> weights(std::size_t layer);
  std::span<double> bias(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<const double> bias(std::size_t layer) const;

  /// Sign pattern of every hidden pre-activation for input x (1 = active).
  std::vector<std::uint8_t> relu_pattern(const Matrix& x) const;

  bool operator==(const MlpNet&) const = default;

 private:
  struct Layer {
    std::size_t in;
    std::size_t out;
    std::size_t w_offset;
    std::size_t b_offset;

    bool operator==(const Layer&) const = default;
  };

  Matrix run_forward(const Matrix& x, ForwardCache* cache) const;
  Matrix run_backward(const ForwardCache& cache, const Matrix& output_grad,
                      double* grad_sink) const;

  MlpSpec spec_;
  std::vector<Layer> layers_;
  std::vector<double> params_;
  std::vector<double> grads_;
};

}  // namespace parlab
