#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "parlab/numerics/kernels.hpp"
#include "parlab/numerics/rng.hpp"

using namespace parlab;

namespace {

std::vector<double> random_values(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

const kernels::KernelTable* simd() { return kernels::avx2_table(); }

}  // namespace

TEST(Kernels, ScalarGemmMatchesNaiveTripleLoop) {
  Rng rng(3);
  const std::size_t m = 5, n = 7, k = 3;
  const auto a = random_values(m * k, rng);
  const auto b = random_values(k * n, rng);
  std::vector<double> c(m * n, 1.0);
  kernels::scalar_table().gemm(m, n, k, a.data(), k, b.data(), n, c.data(), n, true);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 1.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      EXPECT_NEAR(c[i * n + j], s, 1e-13);
    }
  }
}

class KernelEquivalence : public ::testing::TestWithParam<std::tuple<int, int, int>> {};

TEST_P(KernelEquivalence, GemmAgreesWithScalar) {
  if (!simd()) GTEST_SKIP() << "AVX2 kernels unavailable";
  const auto [m, n, k] = GetParam();
  Rng rng(static_cast<std::uint64_t>(m * 1000 + n * 10 + k));
  const auto a = random_values(static_cast<std::size_t>(m * k), rng);
  const auto b = random_values(static_cast<std::size_t>(k * n), rng);
  for (bool acc : {false, true}) {
    std::vector<double> c0 = random_values(static_cast<std::size_t>(m * n), rng);
    std::vector<double> c1 = c0;
    kernels::scalar_table().gemm(m, n, k, a.data(), k, b.data(), n, c0.data(), n, acc);
    simd()->gemm(m, n, k, a.data(), k, b.data(), n, c1.data(), n, acc);
    for (std::size_t i = 0; i < c0.size(); ++i) {
      // Summation order differs; bound by k ulps of the magnitude sum.
      EXPECT_NEAR(c0[i], c1[i], 1e-13 * (k + 2) * 4.0) << "index " << i;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, KernelEquivalence,
                         ::testing::Values(std::tuple{1, 1, 1}, std::tuple{3, 2, 5}, std::tuple{4, 4, 4},
                                           std::tuple{5, 9, 3}, std::tuple{7, 13, 17},
                                           std::tuple{64, 64, 64}, std::tuple{256, 1, 64},
                                           std::tuple{33, 12, 1}, std::tuple{8, 257, 31}));

TEST(Kernels, ElementwiseKernelsBitwiseEqualAcrossBackends) {
  if (!simd()) GTEST_SKIP() << "AVX2 kernels unavailable";
  Rng rng(11);
  for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 31u, 1000u}) {
    const auto x = random_values(n, rng);
    auto r0 = x, r1 = x;
    kernels::scalar_table().relu(n, r0.data());
    simd()->relu(n, r1.data());
    EXPECT_EQ(r0, r1);

    const auto g = random_values(n, rng);
    auto g0 = g, g1 = g;
    kernels::scalar_table().relu_backward(n, x.data(), g0.data());
    simd()->relu_backward(n, x.data(), g1.data());
    EXPECT_EQ(g0, g1);

    auto e0 = g, e1 = g;
    kernels::scalar_table().ema(n, 0.995, x.data(), e0.data());
    simd()->ema(n, 0.995, x.data(), e1.data());
    EXPECT_EQ(e0, e1);

    const kernels::AdamCoeffs coeffs{1e-3, 0.9, 0.999, 1e-8, 1 - 0.9 * 0.9, 1 - 0.999 * 0.999};
    auto p0 = x, p1 = x;
    auto m0 = random_values(n, rng);
    auto m1 = m0;
    std::vector<double> v0(n), v1;
    for (double& v : v0) v = rng.uniform();
    v1 = v0;
    kernels::scalar_table().adam(n, p0.data(), g.data(), m0.data(), v0.data(), coeffs);
    simd()->adam(n, p1.data(), g.data(), m1.data(), v1.data(), coeffs);
    EXPECT_EQ(p0, p1);
    EXPECT_EQ(m0, m1);
    EXPECT_EQ(v0, v1);

    const std::size_t cols = n % 5 + 1;
    const std::size_t rows = n / cols;
    const auto bias = random_values(cols, rng);
    auto b0 = x, b1 = x;
    kernels::scalar_table().add_bias_rows(rows, cols, bias.data(), b0.data());
    simd()->add_bias_rows(rows, cols, bias.data(), b1.data());
    EXPECT_EQ(b0, b1);

    std::vector<double> s0(cols), s1(cols);
    kernels::scalar_table().column_sums(rows, cols, x.data(), s0.data(), false);
    simd()->column_sums(rows, cols, x.data(), s1.data(), false);
    EXPECT_EQ(s0, s1);
  }
}

TEST(Kernels, DotAgreesWithScalar) {
  if (!simd()) GTEST_SKIP() << "AVX2 kernels unavailable";
  Rng rng(5);
  for (std::size_t n : {0u, 1u, 5u, 8u, 13u, 256u, 1001u}) {
    const auto x = random_values(n, rng);
    const auto y = random_values(n, rng);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y[i]);
    EXPECT_NEAR(kernels::scalar_table().dot(n, x.data(), y.data()), simd()->dot(n, x.data(), y.data()),
                1e-15 * (mag + 1.0) * 8);
  }
}

TEST(Kernels, SelectBackendSwitchesActiveTable) {
  const auto before = kernels::active_backend();
  kernels::select_backend(kernels::Backend::Scalar);
  EXPECT_EQ(kernels::active_backend(), kernels::Backend::Scalar);
  EXPECT_EQ(kernels::backend_name(kernels::Backend::Scalar), "scalar");
  if (simd()) {
    kernels::select_backend(kernels::Backend::Avx2);
    EXPECT_EQ(kernels::active_backend(), kernels::Backend::Avx2);
  } else {
    EXPECT_THROW(kernels::select_backend(kernels::Backend::Avx2), std::runtime_error);
  }
  kernels::select_backend(before);
}
