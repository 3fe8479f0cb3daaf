#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "deepboot/model.hpp"
#include "test_util.hpp"

namespace deepboot {
namespace {

using testing::random_classes;
using testing::random_matrix;
using testing::random_targets;

ModelSpec linear_mse(std::size_t d, bool bias = true) {
  return ModelSpec{d, {}, Activation::identity, MseOnLogits{1}, bias};
}

ModelSpec mlp_softmax(std::size_t d, std::vector<std::size_t> hidden, std::size_t k) {
  return ModelSpec{d, std::move(hidden), Activation::relu, SoftmaxXent{k}, true};
}

bool bit_equal(const LayerTensors& a, const LayerTensors& b) {
  std::vector<double> x, y;
  a.for_each([&](double v) { x.push_back(v); });
  b.for_each([&](double v) { y.push_back(v); });
  return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

TEST(InitParams, DeterministicPerSeed) {
  const auto spec = linear_mse(3);
  EXPECT_TRUE(bit_equal(init_params(spec, 7), init_params(spec, 7)));
  EXPECT_FALSE(bit_equal(init_params(spec, 7), init_params(spec, 8)));
}

TEST(InitParams, LinearBiasIsZero) {
  const auto p = init_params(linear_mse(3), 7);
  ASSERT_EQ(p.layers.size(), 1u);
  for (double b : p.layers[0].bias) EXPECT_EQ(b, 0.0);
}

TEST(InitParams, ShapeChain) {
  const auto p = init_params(mlp_softmax(4, {8}, 2), 1);
  ASSERT_EQ(p.layers.size(), 2u);
  EXPECT_EQ(p.layers[0].weight.rows(), 8u);
  EXPECT_EQ(p.layers[0].weight.cols(), 4u);
  EXPECT_EQ(p.layers[1].weight.rows(), 2u);
  EXPECT_EQ(p.layers[1].weight.cols(), 8u);
}

TEST(InitParams, ScaledUniformRange) {
  const auto p = init_params(mlp_softmax(16, {64}, 3), 5);
  const double bound0 = 1.0 / 4.0, bound1 = 1.0 / 8.0;
  double mean = 0.0;
  for (double w : p.layers[0].weight.flat()) {
    EXPECT_LE(std::abs(w), bound0);
    mean += w;
  }
  for (double w : p.layers[1].weight.flat()) EXPECT_LE(std::abs(w), bound1);
  EXPECT_NEAR(mean / 1024.0, 0.0, 4 * bound0 / std::sqrt(3.0 * 1024));
}

TEST(InitParams, InvalidSpecRejected) {
  EXPECT_THROW(init_params(linear_mse(0), 1), ConfigError);
  EXPECT_THROW(init_params(mlp_softmax(4, {0}, 2), 1), ConfigError);
  EXPECT_THROW(init_params(mlp_softmax(4, {3}, 1), 1), ConfigError);
}

TEST(Forward, LinearInnerProduct) {
  const auto spec = linear_mse(5);
  auto p = zero_params(spec);
  p.layers[0].weight(0, 0) = 1.0;  // beta = e1
  Matrix x(1, 5);
  x(0, 0) = 2.0;
  EXPECT_EQ(forward(spec, p, x)(0, 0), 2.0);
}

TEST(Forward, ZeroWeightMlpGivesZeroLogits) {
  const auto spec = mlp_softmax(6, {5, 4}, 3);
  const auto out = forward(spec, zero_params(spec), random_matrix(9, 6, 1));
  EXPECT_EQ(out.rows(), 9u);
  EXPECT_EQ(out.cols(), 3u);
  for (double v : out.flat()) EXPECT_EQ(v, 0.0);
}

TEST(Forward, IdentityMlpEqualsWeightProduct) {
  ModelSpec spec{7, {5}, Activation::identity, SoftmaxXent{3}, false};
  const auto p = init_params(spec, 11);
  const Matrix x = random_matrix(4, 7, 2);
  // Oracle: x * W1^T * W2^T by explicit triple loops.
  const Matrix oracle =
      testing::naive_matmul(testing::naive_matmul(x, p.layers[0].weight.transposed()), p.layers[1].weight.transposed());
  const Matrix got = forward(spec, p, x);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.flat()[i], oracle.flat()[i], 1e-13);
}

TEST(Forward, ShapeMismatchThrows) {
  const auto spec = linear_mse(3);
  EXPECT_THROW(forward(spec, init_params(spec, 1), Matrix(2, 4)), ShapeError);
}

TEST(Forward, IsPure) {
  const auto spec = mlp_softmax(8, {16}, 4);
  const auto p = init_params(spec, 3);
  const Matrix x = random_matrix(10, 8, 4);
  EXPECT_EQ(forward(spec, p, x), forward(spec, p, x));
}

TEST(Softmax, KnownValues) {
  const std::vector<double> z0{0.0, 0.0};
  auto p = softmax_probs(z0);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);

  const std::vector<double> big{1000.0, 1000.0};
  p = softmax_probs(big);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);

  // e^{ln 3} / (e^{ln 3} + 1) = 3/4
  const std::vector<double> z{std::log(3.0), 0.0};
  p = softmax_probs(z);
  EXPECT_NEAR(p[0], 0.75, 1e-15);
  EXPECT_NEAR(p[1], 0.25, 1e-15);
}

TEST(Softmax, SumsToOneAndShiftInvariant) {
  RngStream r(99);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + r.below(20);
    std::vector<double> z(k), shifted(k);
    const double scale = std::pow(10.0, r.uniform(-2, 3));
    const double shift = r.uniform(-500, 500);
    for (std::size_t j = 0; j < k; ++j) {
      z[j] = scale * r.normal();
      shifted[j] = z[j] + shift;
    }
    const auto p = softmax_probs(z);
    const auto q = softmax_probs(shifted);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      EXPECT_GE(p[j], 0.0);
      EXPECT_LE(p[j], 1.0);
      EXPECT_NEAR(p[j], q[j], 1e-9);
      s += p[j];
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(LossAndGrad, GlobalOptimumOfNoiselessLinear) {
  const auto spec = linear_mse(4, false);
  auto p = zero_params(spec);
  const std::vector<double> beta{0.5, -1.0, 2.0, 0.25};
  for (std::size_t j = 0; j < 4; ++j) p.layers[0].weight(0, j) = beta[j];
  const Matrix x = random_matrix(12, 4, 3);
  std::vector<double> y(12);
  for (std::size_t i = 0; i < 12; ++i) y[i] = linalg::dot(x.row(i), beta);
  const auto lg = loss_and_grad(spec, p, x, y);
  EXPECT_NEAR(lg.loss, 0.0, 1e-28);
  lg.grads.for_each([](double g) { EXPECT_NEAR(g, 0.0, 1e-14); });
}

TEST(LossAndGrad, UniformLogitsGiveLogK) {
  const auto spec = mlp_softmax(3, {}, 2);
  Matrix x(1, 3, 1.0);
  const std::vector<double> y{1.0};
  EXPECT_NEAR(loss_and_grad(spec, zero_params(spec), x, y).loss, std::log(2.0), 1e-15);
}

TEST(LossAndGrad, LinearMseMatchesNormalEquationGradient) {
  const std::size_t n = 25, d = 9;
  const auto spec = linear_mse(d, false);
  const auto p = init_params(spec, 4);
  const Matrix x = random_matrix(n, d, 5);
  const auto y = random_targets(n, 6);
  const auto lg = loss_and_grad(spec, p, x, y);
  // (2/n) X^T (X beta - y)
  for (std::size_t j = 0; j < d; ++j) {
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double pred = 0.0;
      for (std::size_t k = 0; k < d; ++k) pred += x(i, k) * p.layers[0].weight(0, k);
      g += 2.0 / n * x(i, j) * (pred - y[i]);
    }
    EXPECT_NEAR(lg.grads.layers[0].weight(0, j), g, 1e-12);
  }
}

TEST(LossAndGrad, ErrorsOnBadBatches) {
  const auto spec = mlp_softmax(3, {4}, 2);
  const auto p = init_params(spec, 1);
  EXPECT_THROW(loss_and_grad(spec, p, Matrix(0, 3), std::vector<double>{}), ShapeError);
  EXPECT_THROW(loss_and_grad(spec, p, Matrix(2, 3), std::vector<double>{0.0}), ShapeError);
  EXPECT_THROW(loss_and_grad(spec, p, Matrix(1, 3), std::vector<double>{2.0}), ShapeError);
}

TEST(GradCheck, LinearMseIsExactToRoundoff) {
  const auto spec = linear_mse(6);
  const auto p = init_params(spec, 2);
  const Matrix x = random_matrix(5, 6, 3);
  const auto y = random_targets(5, 4);
  const auto r = grad_check(spec, p, x, y, 1e-4);
  EXPECT_EQ(r.checked, p.parameter_count());
  EXPECT_LT(r.max_relative_error, 1e-8);
}

TEST(GradCheck, MlpSoftmax) {
  const auto spec = mlp_softmax(10, {12, 8}, 4);
  const auto p = init_params(spec, 8);
  const Matrix x = random_matrix(16, 10, 9);
  const auto y = random_classes(16, 4, 10);
  const auto r = grad_check(spec, p, x, y, 1e-5, 128);
  EXPECT_GE(r.checked, 100u);
  EXPECT_LT(r.max_relative_error, 1e-5);
}

TEST(GradCheck, RejectsEmptyBatchAndBadEps) {
  const auto spec = linear_mse(3);
  const auto p = init_params(spec, 1);
  EXPECT_THROW(grad_check(spec, p, Matrix(0, 3), std::vector<double>{}, 1e-5), ShapeError);
  EXPECT_THROW(grad_check(spec, p, Matrix(1, 3), std::vector<double>{0.0}, 1e-2), ConfigError);
}

}  // namespace
}  // namespace deepboot
