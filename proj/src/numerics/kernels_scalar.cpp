#include "kernels_impl.hpp"

#include <cmath>

namespace parlab::kernels::scalar {

void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * ldc;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    }
    const double* ai = a + i * lda;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      const double* bp = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void add_bias_rows(std::size_t rows, std::size_t cols, const double* bias, double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* xr = x + r * cols;
    for (std::size_t c = 0; c < cols; ++c) xr[c] += bias[c];
  }
}

void column_sums(std::size_t rows, std::size_t cols, const double* x, double* out,
                 bool accumulate) {
  if (!accumulate) {
    for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += xr[c];
  }
}

void relu(std::size_t n, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(std::size_t n, const double* activated, double* grad) {
  for (std::size_t i = 0; i < n; ++i) grad[i] = activated[i] > 0.0 ? grad[i] : 0.0;
}

void ema(std::size_t n, double alpha, const double* value, double* avg) {
  const double w = 1.0 - alpha;
  for (std::size_t i = 0; i < n; ++i) avg[i] = alpha * avg[i] + w * value[i];
}

void adam(std::size_t n, double* params, const double* grads, double* m, double* v,
          const AdamCoeffs& c) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads[i];
    m[i] = c.beta1 * m[i] + one_minus_b1 * g;
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
    const double m_hat = m[i] / c.bias_correction1;
    const double v_hat = v[i] / c.bias_correction2;
    params[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

double dot(std::size_t n, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace parlab::kernels::scalar
