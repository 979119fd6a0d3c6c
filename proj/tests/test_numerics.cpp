#include <gtest/gtest.h>

#include <cmath>

#include "parlab/errors.hpp"
#include "parlab/numerics/adam.hpp"
#include "parlab/numerics/grad_check.hpp"
#include "parlab/numerics/kernels.hpp"
#include "parlab/numerics/matrix.hpp"
#include "parlab/numerics/mlp.hpp"

using namespace parlab;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

// Mean squared output against a fixed target; the gradient is analytic.
OutputLoss squared_loss(const Matrix& target) {
  return [target](const Matrix& out, Matrix* grad) {
    double s = 0.0;
    const double scale = 1.0 / static_cast<double>(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = out.data()[i] - target.data()[i];
      s += d * d;
      if (grad) grad->data()[i] = 2.0 * d * scale;
    }
    return s * scale;
  };
}

}  // namespace

TEST(Matrix, ShapesAreChecked) {
  Matrix a(2, 3), b(2, 3);
  EXPECT_THROW(matmul(a, b), DimensionError);
  EXPECT_THROW(hconcat(a, Matrix(3, 1)), DimensionError);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>(3)), DimensionError);
  EXPECT_THROW(require_same_shape(a, Matrix(3, 2), "t"), DimensionError);
}

TEST(Matrix, MatmulSmallExample) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{5, 6}, {7, 8}};
  EXPECT_EQ(matmul(a, b), (Matrix{{19, 22}, {43, 50}}));
  EXPECT_EQ(matmul_tn(a, b), (Matrix{{26, 30}, {38, 44}}));
  EXPECT_EQ(matmul_nt(a, b), (Matrix{{17, 23}, {39, 53}}));
  EXPECT_EQ(hconcat(a, b), (Matrix{{1, 2, 5, 6}, {3, 4, 7, 8}}));
  EXPECT_EQ(column_block(hconcat(a, b), 1, 2), (Matrix{{2, 5}, {4, 7}}));
  EXPECT_EQ(a.transposed(), (Matrix{{1, 3}, {2, 4}}));
}

TEST(Mlp, ZeroWeightsGiveReplicatedBias) {
  Rng rng(0);
  MlpNet net({3, 2, {4}}, rng);
  for (double& p : net.params()) p = 0.0;
  net.bias(1)[0] = 1.5;
  net.bias(1)[1] = -2.0;
  const Matrix out = net.forward(random_matrix(5, 3, rng));
  for (std::size_t r = 0; r < 5; ++r) {
    EXPECT_EQ(out(r, 0), 1.5);
    EXPECT_EQ(out(r, 1), -2.0);
  }
}

TEST(Mlp, IdentityLikeNet) {
  Rng rng(0);
  MlpNet net({1, 1, {}}, rng);
  net.weights(0)[0] = 1.0;
  net.bias(0)[0] = 0.0;
  EXPECT_EQ(net.forward(Matrix{{3.0}})(0, 0), 3.0);
}

TEST(Mlp, IdenticalRowsGiveIdenticalOutputsAndRepeatsAreBitwise) {
  Rng rng(4);
  MlpNet net({3, 2, {16, 16}}, rng);
  const Matrix row = random_matrix(1, 3, rng);
  const Matrix x = repeat_row(row.row(0), 2);
  const Matrix out = net.forward(x);
  EXPECT_EQ(out.row(0)[0], out.row(1)[0]);
  EXPECT_EQ(out.row(0)[1], out.row(1)[1]);
  EXPECT_EQ(net.forward(x), out);
}

TEST(Mlp, InputWidthMismatchThrows) {
  Rng rng(0);
  MlpNet net({3, 1, {4}}, rng);
  EXPECT_THROW(net.forward(Matrix(2, 4)), DimensionError);
}

TEST(Mlp, BackwardWithoutCacheIsUsageError) {
  Rng rng(0);
  MlpNet net({3, 1, {4}}, rng);
  ForwardCache empty;
  EXPECT_THROW(net.backward(empty, Matrix(1, 1)), UsageError);
}

TEST(Mlp, ZeroOutputGradGivesZeroGradients) {
  Rng rng(1);
  MlpNet net({3, 2, {8, 8}}, rng);
  ForwardCache cache;
  const Matrix x = random_matrix(4, 3, rng);
  net.forward(x, cache);
  net.zero_grad();
  const Matrix gx = net.backward(cache, Matrix(4, 2));
  for (double g : net.grads()) EXPECT_EQ(g, 0.0);
  for (double g : gx.values()) EXPECT_EQ(g, 0.0);
}

TEST(Mlp, LinearNetWeightGradientEqualsInput) {
  Rng rng(0);
  MlpNet net({3, 1, {}}, rng);
  ForwardCache cache;
  const Matrix x{{0.5, -1.0, 2.0}};
  net.forward(x, cache);
  net.zero_grad();
  net.backward(cache, Matrix{{1.0}});
  const auto g = net.grads();
  EXPECT_EQ(g[0], 0.5);
  EXPECT_EQ(g[1], -1.0);
  EXPECT_EQ(g[2], 2.0);
  EXPECT_EQ(g[3], 1.0);  // bias
}

TEST(Mlp, ScaledTanhOutputStaysInBounds) {
  Rng rng(2);
  MlpNet net({2, 2, {8}, OutputActivation::ScaledTanh, 1.0}, rng);
  const Matrix out = net.forward(random_matrix(50, 2, rng));
  for (double v : out.values()) EXPECT_LE(std::abs(v), 1.0);
}

TEST(GradCheck, LinearNetQuadraticLossIsExact) {
  Rng rng(7);
  MlpNet net({4, 3, {}}, rng);
  const Matrix x = random_matrix(6, 4, rng);
  const auto r = grad_check(net, x, squared_loss(random_matrix(6, 3, rng)));
  EXPECT_GT(r.checked, 0u);
  EXPECT_LT(r.max_relative_error, 1e-8);
}

TEST(GradCheck, ReluNetOnTenSeeds) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    MlpNet net({5, 3, {32, 32}}, rng);
    const Matrix x = random_matrix(8, 5, rng);
    GradCheckOptions opts;
    opts.seed = seed;
    opts.samples = 128;
    const auto r = grad_check(net, x, squared_loss(random_matrix(8, 3, rng)), opts);
    EXPECT_GE(r.checked, 64u);
    EXPECT_LT(r.max_relative_error, 1e-4) << "seed " << seed;
  }
}

TEST(GradCheck, ScaledTanhOutput) {
  Rng rng(9);
  MlpNet net({3, 2, {16, 16}, OutputActivation::ScaledTanh, 2.0}, rng);
  const Matrix x = random_matrix(5, 3, rng);
  const auto r = grad_check(net, x, squared_loss(random_matrix(5, 2, rng)));
  EXPECT_LT(r.max_relative_error, 1e-4);
}

TEST(GradCheck, RejectsNonPositiveEpsilon) {
  Rng rng(0);
  MlpNet net({2, 1, {4}}, rng);
  GradCheckOptions opts;
  opts.epsilon = 0.0;
  EXPECT_THROW(grad_check(net, Matrix(1, 2), squared_loss(Matrix(1, 1)), opts), std::invalid_argument);
}

TEST(Adam, ZeroGradientLeavesParametersBitwiseUnchanged) {
  Adam adam(3, {0.1});
  std::vector<double> p{1.0, -2.0, 3.5};
  const auto before = p;
  std::vector<double> g{0.5, 0.5, 0.5};
  adam.step(p, g);
  const std::vector<double> m_before(adam.first_moment().begin(), adam.first_moment().end());
  const auto after_first = p;
  std::vector<double> zero(3, 0.0);
  adam.step(p, zero);
  // Parameters still move from momentum; a fresh optimizer must not.
  Adam fresh(3, {0.1});
  std::vector<double> q = before;
  fresh.step(q, zero);
  EXPECT_EQ(q, before);
  EXPECT_EQ(fresh.first_moment()[0], 0.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(adam.first_moment()[i], 0.9 * m_before[i]);
  EXPECT_NE(p, after_first);
}

TEST(Adam, FirstStepHasMagnitudeLr) {
  Adam adam(3, {0.01});
  std::vector<double> p{0.0, 0.0, 0.0};
  std::vector<double> g{3.0, -0.2, 1e-3};
  adam.step(p, g);
  EXPECT_NEAR(p[0], -0.01, 1e-9);
  EXPECT_NEAR(p[1], 0.01, 1e-9);
  EXPECT_NEAR(p[2], -0.01, 1e-7);
  EXPECT_EQ(adam.step_count(), 1u);
}

TEST(Adam, ScalarQuadraticDescent) {
  Adam adam(1, {0.1});
  std::vector<double> w{0.0};
  for (int i = 0; i < 100; ++i) {
    std::vector<double> g{2.0 * (w[0] - 3.0)};
    adam.step(w, g);
  }
  EXPECT_NEAR(w[0], 3.0, 0.5);
}

TEST(Adam, NonFiniteGradientRaisesWithStep) {
  Adam adam(2);
  std::vector<double> p{1.0, 1.0};
  std::vector<double> ok{0.1, 0.1};
  adam.step(p, ok);
  const auto before = p;
  std::vector<double> bad{0.1, std::nan("")};
  try {
    adam.step(p, bad);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.step(), 2u);
  }
  EXPECT_EQ(p, before);
  EXPECT_EQ(adam.step_count(), 1u);
}

TEST(Adam, SizeMismatchThrows) {
  Adam adam(2);
  std::vector<double> p{1.0, 1.0};
  std::vector<double> g{0.1};
  EXPECT_THROW(adam.step(p, g), DimensionError);
}

TEST(Adam, ScalarAndSimdBackendsProduceIdenticalTrajectories) {
  if (!kernels::avx2_table()) GTEST_SKIP();
  const auto before = kernels::active_backend();
  auto run = [](kernels::Backend b) {
    kernels::select_backend(b);
    Rng rng(12);
    MlpNet net({3, 2, {16, 16}}, rng);
    Adam adam(net.param_count());
    const Matrix x = random_matrix(8, 3, rng);
    const auto loss = squared_loss(random_matrix(8, 2, rng));
    for (int i = 0; i < 20; ++i) {
      ForwardCache cache;
      const Matrix out = net.forward(x, cache);
      Matrix d(out.rows(), out.cols());
      loss(out, &d);
      net.zero_grad();
      net.backward(cache, d);
      adam.step(net.params(), net.grads());
    }
    return std::vector<double>(net.params().begin(), net.params().end());
  };
  const auto a = run(kernels::Backend::Scalar);
  const auto b = run(kernels::Backend::Avx2);
  kernels::select_backend(before);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
}
