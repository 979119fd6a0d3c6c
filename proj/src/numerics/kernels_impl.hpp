#pragma once

#include "parlab/numerics/kernels.hpp"

namespace parlab::kernels {

namespace scalar {
void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);
void add_bias_rows(std::size_t rows, std::size_t cols, const double* bias, double* x);
void column_sums(std::size_t rows, std::size_t cols, const double* x, double* out,
                 bool accumulate);
void relu(std::size_t n, double* x);
void relu_backward(std::size_t n, const double* activated, double* grad);
void ema(std::size_t n, double alpha, const double* value, double* avg);
void adam(std::size_t n, double* params, const double* grads, double* m, double* v,
          const AdamCoeffs& c);
double dot(std::size_t n, const double* x, const double* y);
}  // namespace scalar

#if defined(PARLAB_HAVE_AVX2)
namespace avx2 {
void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);
void add_bias_rows(std::size_t rows, std::size_t cols, const double* bias, double* x);
void column_sums(std::size_t rows, std::size_t cols, const double* x, double* out,
                 bool accumulate);
void relu(std::size_t n, double* x);
void relu_backward(std::size_t n, const double* activated, double* grad);
void ema(std::size_t n, double alpha, const double* value, double* avg);
void adam(std::size_t n, double* params, const double* grads, double* m, double* v,
          const AdamCoeffs& c);
double dot(std::size_t n, const double* x, const double* y);
}  // namespace avx2
#endif

}  // namespace parlab::kernels
