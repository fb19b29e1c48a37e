#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mebface/layers.hpp"

namespace mebface {
namespace {

Tensor3 random_tensor(std::size_t d, std::size_t r, std::size_t c, Rng& rng) {
  Tensor3 t(d, r, c);
  for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

ConvLayerParams random_conv(std::size_t out, std::size_t in, std::size_t f, Rng& rng) {
  ConvLayerParams p(out, in, f, f);
  for (double& v : p.filters) v = rng.uniform(-1.0, 1.0);
  for (double& v : p.biases) v = rng.uniform(-1.0, 1.0);
  return p;
}

// Direct quadruple loop over (out map, position, in map, tap).
Tensor3 conv_oracle(const Tensor3& x, const ConvLayerParams& p) {
  const std::size_t rows = x.rows() - p.filter_rows + 1;
  const std::size_t cols = x.cols() - p.filter_cols + 1;
  Tensor3 out(p.out_maps, rows, cols);
  for (std::size_t j = 0; j < p.out_maps; ++j)
    for (std::size_t y = 0; y < rows; ++y)
      for (std::size_t z = 0; z < cols; ++z) {
        double acc = p.biases[j];
        for (std::size_t i = 0; i < p.in_maps; ++i)
          for (std::size_t r = 0; r < p.filter_rows; ++r)
            for (std::size_t c = 0; c < p.filter_cols; ++c) acc += p.filter(j, i, r, c) * x(i, y + r, z + c);
        out(j, y, z) = acc;
      }
  return out;
}

TEST(Tensor3, RejectsZeroDimensions) { EXPECT_THROW(Tensor3(0, 2, 2), ShapeError); }

TEST(Tensor3, IndexingIsRowMajorPerMap) {
  Tensor3 t(2, 3, 4);
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.index(1, 2, 3), 23u);
  EXPECT_EQ(t.index(1, 0, 0), 12u);
}

TEST(Conv, ReferenceFirstLayerShape) {
  Rng rng(1);
  const auto out = conv_forward(Tensor3(1, 64, 64), random_conv(32, 1, 7, rng));
  EXPECT_EQ(out.maps(), 32u);
  EXPECT_EQ(out.rows(), 58u);
  EXPECT_EQ(out.cols(), 58u);
}

TEST(Conv, ZeroInputYieldsBias) {
  Rng rng(2);
  const auto p = random_conv(3, 1, 2, rng);
  const auto out = conv_forward(Tensor3(1, 3, 3), p);
  for (std::size_t j = 0; j < 3; ++j)
    for (double v : out.map(j)) EXPECT_EQ(v, p.biases[j]);
}

TEST(Conv, MatchesQuadrupleLoopOracle) {
  Rng rng(3);
  const auto x = random_tensor(1, 5, 5, rng);
  const auto p = random_conv(1, 1, 3, rng);
  const auto got = conv_forward(x, p);
  const auto want = conv_oracle(x, p);
  ASSERT_TRUE(got.same_shape(want));
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.values()[i], want.values()[i], 1e-12);
}

TEST(Conv, OracleEquivalenceOnRandomInstances) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t in = 1 + rng.below(3), out = 1 + rng.below(4), f = 1 + rng.below(4);
    const std::size_t rows = f + rng.below(6), cols = f + rng.below(6);
    const auto x = random_tensor(in, rows, cols, rng);
    const auto p = random_conv(out, in, f, rng);
    const auto got = conv_forward(x, p);
    const auto want = conv_oracle(x, p);
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got.values()[i], want.values()[i], 1e-10);
  }
}

TEST(Conv, ShapeErrors) {
  Rng rng(5);
  EXPECT_THROW(conv_forward(Tensor3(2, 5, 5), random_conv(1, 1, 3, rng)), ShapeError);
  EXPECT_THROW(conv_forward(Tensor3(1, 2, 5), random_conv(1, 1, 3, rng)), ShapeError);
}

TEST(Conv, BackwardInputGradientMatchesFiniteDifference) {
  Rng rng(6);
  auto x = random_tensor(2, 5, 6, rng);
  const auto p = random_conv(3, 2, 3, rng);
  const auto g = random_tensor(3, 3, 4, rng);
  ConvLayerParams grads(3, 2, 3, 3);
  Tensor3 dx;
  conv_backward(x, p, g, grads, &dx);
  auto objective = [&](const Tensor3& in) {
    const auto y = conv_forward(in, p);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y.values()[i] * g.values()[i];
    return s;
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x.values()[i];
    x.values()[i] = orig + 1e-6;
    const double up = objective(x);
    x.values()[i] = orig - 1e-6;
    const double down = objective(x);
    x.values()[i] = orig;
    EXPECT_NEAR(dx.values()[i], (up - down) / 2e-6, 1e-7);
  }
}

TEST(Relu, Elementwise) {
  EXPECT_EQ(relu(-2.0), 0.0);
  EXPECT_EQ(relu(3.0), 3.0);
  const Vector v{-1.0, 0.0, 2.0};
  EXPECT_EQ(relu(v), (Vector{0.0, 0.0, 2.0}));
}

TEST(MaxPool, ReferenceShapes) {
  EXPECT_EQ(maxpool_forward(Tensor3(1, 58, 58)).output.rows(), 29u);
  const auto odd = maxpool_forward(Tensor3(1, 23, 23)).output;
  EXPECT_EQ(odd.rows(), 11u);
  EXPECT_EQ(odd.cols(), 11u);
}

TEST(MaxPool, ConstantMapPicksTopLeft) {
  const Tensor3 x(1, 4, 6, 0.7);
  const auto r = maxpool_forward(x);
  for (double v : r.output.values()) EXPECT_EQ(v, 0.7);
  std::size_t k = 0;
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(r.argmax[k++], x.index(0, 2 * y, 2 * c));
}

TEST(MaxPool, RoutesGradientToArgmax) {
  Tensor3 x(1, 2, 2);
  x(0, 1, 0) = 5.0;
  const auto r = maxpool_forward(x);
  EXPECT_EQ(r.output(0, 0, 0), 5.0);
  const auto g = maxpool_backward(Tensor3(1, 1, 1, 2.0), r.argmax, 1, 2, 2);
  EXPECT_EQ(g(0, 1, 0), 2.0);
  EXPECT_EQ(g(0, 0, 0) + g(0, 0, 1) + g(0, 1, 1), 0.0);
}

TEST(MaxPool, IndicesStayInsideWindow) {
  Rng rng(7);
  const auto x = random_tensor(3, 9, 7, rng);
  const auto r = maxpool_forward(x);
  std::size_t k = 0;
  for (std::size_t m = 0; m < 3; ++m)
    for (std::size_t y = 0; y < r.output.rows(); ++y)
      for (std::size_t c = 0; c < r.output.cols(); ++c, ++k) {
        const std::size_t idx = r.argmax[k];
        const std::size_t map = idx / x.map_size(), row = idx % x.map_size() / x.cols(), col = idx % x.cols();
        EXPECT_EQ(map, m);
        EXPECT_TRUE(row / 2 == y && col / 2 == c);
      }
}

TEST(MaxPool, TooSmallInputThrows) { EXPECT_THROW(maxpool_forward(Tensor3(1, 1, 5)), ShapeError); }

TEST(Dense, IdentityAndBias) {
  DenseLayerParams p(3, 3);
  for (std::size_t i = 0; i < 3; ++i) p.weight(i, i) = 1.0;
  const Vector x{1.5, -2.0, 0.25};
  EXPECT_EQ(dense_forward(x, p), x);
  p.biases = {1.0, 2.0, 3.0};
  EXPECT_EQ(dense_forward(Vector(3, 0.0), DenseLayerParams(p)), (Vector{1.0, 2.0, 3.0}));
}

TEST(Dense, MatchesBruteForceDotProducts) {
  Rng rng(8);
  DenseLayerParams p(3, 4);
  for (double& w : p.weights) w = rng.uniform(-1, 1);
  for (double& b : p.biases) b = rng.uniform(-1, 1);
  Vector x(4);
  for (double& v : x) v = rng.uniform(-1, 1);
  const auto y = dense_forward(x, p);
  for (std::size_t o = 0; o < 3; ++o) {
    double acc = p.biases[o];
    for (std::size_t i = 0; i < 4; ++i) acc += p.weights[o * 4 + i] * x[i];
    EXPECT_NEAR(y[o], acc, 1e-14);
  }
  EXPECT_THROW(dense_forward(Vector(5), p), ShapeError);
}

TEST(Sigmoid, ValuesSymmetryAndSaturation) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-30, 30);
    EXPECT_NEAR(sigmoid(x) + sigmoid(-x), 1.0, 1e-15);
  }
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  for (double x = -1000.0; x <= 1000.0; x += 0.5) EXPECT_TRUE(std::isfinite(sigmoid(x)));
}

TEST(Softmax, NormalizationAndShiftInvariance) {
  EXPECT_EQ(softmax(Vector{0.0, 0.0}), (Vector{0.5, 0.5}));
  const auto u = softmax(Vector(4, 3.0));
  for (double v : u) EXPECT_DOUBLE_EQ(v, 0.25);

  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    Vector x(5);
    for (double& v : x) v = rng.uniform(-20, 20);
    const auto t = softmax(x);
    double sum = 0.0;
    for (double v : t) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);

    // direct formula with explicit max subtraction
    double mx = x[0];
    for (double v : x) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : x) z += std::exp(v - mx);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(t[i], std::exp(x[i] - mx) / z, 1e-15);

    Vector shifted = x;
    for (double& v : shifted) v += 123.0;
    const auto ts = softmax(shifted);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(t[i], ts[i], 1e-12);
  }
}

TEST(Bce, UniformOutputsGiveKLog2) {
  const Vector t(16, 0.5);
  Vector c(16, 0.0);
  for (std::size_t i = 0; i < 16; i += 3) c[i] = 1.0;
  EXPECT_NEAR(bce_loss(t, c), 16 * std::log(2.0), 1e-12);
}

TEST(Bce, PerfectPredictionIsNearZero) {
  const Vector c{1, 0, 1, 1, 0, 0, 1, 0};
  EXPECT_LT(bce_loss(c, c), 1e-10);
  EXPECT_TRUE(std::isfinite(bce_loss(Vector{0.0, 1.0}, Vector{1.0, 0.0})));
}

TEST(Bce, MatchesTermByTermSum) {
  Rng rng(11);
  Vector t(32), c(32);
  for (double& v : t) v = rng.uniform(0.01, 0.99);
  for (double& v : c) v = rng.bit() ? 1.0 : 0.0;
  double want = 0.0;
  for (std::size_t j = 0; j < 32; ++j) want += c[j] == 1.0 ? -std::log(t[j]) : -std::log(1.0 - t[j]);
  EXPECT_NEAR(bce_loss(t, c), want, 1e-12);
  EXPECT_THROW(bce_loss(t, Vector(31)), ShapeError);
}

TEST(CrossEntropy, Cases) {
  EXPECT_LT(ce_loss(Vector{0.0, 1.0, 0.0}, Vector{0, 1, 0}), 1e-12);
  EXPECT_NEAR(ce_loss(Vector(7, 1.0 / 7), Vector{0, 0, 1, 0, 0, 0, 0}), std::log(7.0), 1e-12);
  Rng rng(12);
  Vector x(6);
  for (double& v : x) v = rng.uniform(-3, 3);
  const auto t = softmax(x);
  EXPECT_NEAR(ce_loss(t, Vector{0, 0, 0, 1, 0, 0}), -std::log(t[3]), 1e-14);
  EXPECT_THROW(ce_loss(t, Vector(2)), ShapeError);
}

TEST(Dropout, InferenceIsIdentity) {
  Rng rng(13);
  const Vector x{1.0, -2.0, 3.5};
  const auto r = dropout(x, 0.5, rng, Mode::kInfer);
  EXPECT_EQ(r.output, x);
  EXPECT_TRUE(r.mask.empty());
}

TEST(Dropout, ZeroProbabilityKeepsEverything) {
  Rng rng(14);
  const Vector x{1.0, -2.0, 3.5};
  const auto r = dropout(x, 0.0, rng, Mode::kTrain);
  EXPECT_EQ(r.output, x);
  for (auto m : r.mask) EXPECT_EQ(m, 1);
}

TEST(Dropout, KeptFractionConcentrates) {
  Rng rng(15);
  const Vector x(100000, 1.0);
  const auto r = dropout(x, 0.5, rng, Mode::kTrain);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    kept += r.mask[i];
    EXPECT_EQ(r.output[i], r.mask[i] ? 2.0 : 0.0);
  }
  EXPECT_NEAR(static_cast<double>(kept) / 1e5, 0.5, 0.01);
}

TEST(Dropout, RejectsInvalidProbability) {
  Rng rng(16);
  EXPECT_THROW(dropout(Vector{1.0}, 1.0, rng, Mode::kTrain), std::invalid_argument);
  EXPECT_THROW(dropout(Vector{1.0}, -0.1, rng, Mode::kTrain), std::invalid_argument);
}

}  // namespace
}  // namespace mebface
