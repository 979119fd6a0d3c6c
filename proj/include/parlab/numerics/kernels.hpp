#pragma once

// Data-parallel inner loops behind the MLP, Adam and EMA updates.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is chosen once at startup from CPUID and can be
// overridden with PARLAB_KERNELS=scalar|avx2 or select_backend(). Elementwise
// kernels (Adam, EMA, ReLU) are bitwise identical across backends; GEMM and
// reductions differ only in summation order and FMA rounding.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace parlab::kernels {

enum class Backend { Scalar, Avx2 };

struct AdamCoeffs {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  Backend backend;

  /// C[m x n] (+)= A[m x k] * B[k x n]; all row-major with leading dimensions.
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
               const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);

  /// x[r, :] += bias for every row.
  void (*add_bias_rows)(std::size_t rows, std::size_t cols, const double* bias, double* x);

  /// out[c] (+)= sum_r x[r, c]
  void (*column_sums)(std::size_t rows, std::size_t cols, const double* x, double* out,
                      bool accumulate);

  /// x = max(x, 0)
  void (*relu)(std::size_t n, double* x);

  /// grad[i] = activated[i] > 0 ? grad[i] : 0
  void (*relu_backward)(std::size_t n, const double* activated, double* grad);

  /// ema = alpha * ema + (1 - alpha) * value
  void (*ema)(std::size_t n, double alpha, const double* value, double* ema);

  /// Bias-corrected Adam update in place.
  void (*adam)(std::size_t n, double* params, const double* grads, double* m, double* v,
               const AdamCoeffs& c);

  double (*dot)(std::size_t n, const double* x, const double* y);
};

const KernelTable& scalar_table();
/// Null when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

bool cpu_supports_avx2();

/// The table all numerics route through.
const KernelTable& active();
Backend active_backend();
/// Throws std::runtime_error if the backend is unavailable on this build or CPU.
void select_backend(Backend backend);

std::string_view backend_name(Backend backend);

}  // namespace parlab::kernels
