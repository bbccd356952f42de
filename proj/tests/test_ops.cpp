#include <gtest/gtest.h>

#include <cmath>

#include "gridfill/error.hpp"
#include "gridfill/ops.hpp"
#include "gridfill/rng.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace gridfill;
using testing_helpers::dot;
using testing_helpers::random_binary;
using testing_helpers::random_tensor;

namespace {

struct ConvCase {
  std::size_t cin, cout, h, w, kh, kw, stride, pad;
};

ConvCase random_case(Rng& rng) {
  ConvCase c{};
  c.cin = 1 + uniform_index(rng, 3);
  c.cout = 1 + uniform_index(rng, 3);
  c.h = 3 + uniform_index(rng, 7);
  c.w = 3 + uniform_index(rng, 7);
  c.kh = 1 + uniform_index(rng, 3);
  c.kw = 1 + uniform_index(rng, 3);
  c.stride = 1 + uniform_index(rng, 2);
  c.pad = uniform_index(rng, 2);
  return c;
}

ConvKernel random_kernel(Rng& rng, const ConvCase& c) {
  ConvKernel k;
  k.weights = random_tensor(rng, {c.cout, c.cin, c.kh, c.kw});
  k.bias = random_tensor(rng, {c.cout});
  k.stride = c.stride;
  k.padding = c.pad;
  return k;
}

}  // namespace

TEST(ConvOutSize, Formula) {
  EXPECT_EQ(conv_out_size(192, 7, 2, 3), 96u);
  EXPECT_EQ(conv_out_size(5, 3, 1, 1), 5u);
  EXPECT_EQ(conv_out_size(5, 3, 2, 0), 2u);
  EXPECT_THROW(conv_out_size(2, 5, 1, 0), ShapeError);
}

TEST(Conv2d, MatchesLoopOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const ConvCase c = random_case(rng);
    const ConvKernel k = random_kernel(rng, c);
    const Tensor x = random_tensor(rng, {c.cin, c.h, c.w});
    const Tensor got = conv2d_forward(x, k);
    const Tensor want = oracle::conv2d(x, k.weights, k.bias, c.stride, c.pad);
    ASSERT_LE(oracle::max_abs_diff(got, want), 1e-12) << "trial " << trial;
  }
}

// The backward pass is the adjoint of the forward map: for y = conv(x; W) + b,
// <dy, y - b> equals both <dx, x> and <dW, W>, and db sums dy per channel.
TEST(Conv2d, BackwardIsAdjointOfForward) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const ConvCase c = random_case(rng);
    ConvKernel k = random_kernel(rng, c);
    const Tensor x = random_tensor(rng, {c.cin, c.h, c.w});
    ConvKernel nobias = k;
    nobias.bias.fill(0.0);
    const Tensor y = conv2d_forward(x, nobias);
    const Tensor dy = random_tensor(rng, y.shape());
    const ConvGrads g = conv2d_backward(x, k, dy);
    const double lhs = dot(dy, y);
    EXPECT_NEAR(dot(g.input, x), lhs, 1e-9 * (1 + std::abs(lhs)));
    EXPECT_NEAR(dot(g.weights, k.weights), lhs, 1e-9 * (1 + std::abs(lhs)));
    for (std::size_t o = 0; o < c.cout; ++o) {
      double s = 0.0;
      for (std::size_t i = 0; i < y.size() / c.cout; ++i) s += dy[o * (y.size() / c.cout) + i];
      EXPECT_NEAR(g.bias[o], s, 1e-12);
    }
  }
}

TEST(Conv2d, RejectsMismatchedShapes) {
  ConvKernel k;
  k.weights = Tensor({2, 3, 3, 3});
  k.bias = Tensor({2});
  EXPECT_THROW(conv2d_forward(Tensor({2, 5, 5}), k), ShapeError);
  k.bias = Tensor({3});
  EXPECT_THROW(conv2d_forward(Tensor({3, 5, 5}), k), ShapeError);
}

TEST(Conv1d, MatchesLoopOracleAndAdjoint) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t cin = 1 + uniform_index(rng, 3), cout = 1 + uniform_index(rng, 3);
    const std::size_t len = 4 + uniform_index(rng, 20), kk = 1 + uniform_index(rng, 4);
    ConvKernel k;
    k.weights = random_tensor(rng, {cout, cin, kk});
    k.bias = random_tensor(rng, {cout});
    k.stride = 1 + uniform_index(rng, 2);
    k.padding = uniform_index(rng, 3);
    const Tensor x = random_tensor(rng, {cin, len});
    const Tensor got = conv1d_forward(x, k);
    const Tensor want = oracle::conv1d(x, k.weights, k.bias, k.stride, k.padding);
    ASSERT_LE(oracle::max_abs_diff(got, want), 1e-12);

    ConvKernel nobias = k;
    nobias.bias.fill(0.0);
    const Tensor y = conv1d_forward(x, nobias);
    const Tensor dy = random_tensor(rng, y.shape());
    const ConvGrads g = conv1d_backward(x, k, dy);
    EXPECT_NEAR(dot(g.input, x), dot(dy, y), 1e-9 * (1 + std::abs(dot(dy, y))));
    EXPECT_NEAR(dot(g.weights, k.weights), dot(dy, y), 1e-9 * (1 + std::abs(dot(dy, y))));
  }
}

// Partial convolution properties over random geometries and masks.
TEST(PartialConv, PropertiesOverRandomShapes) {
  Rng rng(14);
  for (int trial = 0; trial < 1000; ++trial) {
    const ConvCase c = random_case(rng);
    const ConvKernel k = random_kernel(rng, c);
    const Tensor x = random_tensor(rng, {c.cin, c.h, c.w});
    const bool per_channel = uniform01(rng) < 0.3;
    const Tensor mask =
        random_binary(rng, {per_channel ? c.cin : 1, c.h, c.w}, uniform(rng, 0.0, 1.0));

    // Agrees with the definition.
    const PartialConvResult r = partial_conv2d_forward(x, mask, k);
    const auto want = oracle::partial_conv2d(x, mask, k.weights, k.bias, c.stride, c.pad);
    ASSERT_LE(oracle::max_abs_diff(r.output, want.output), 1e-10) << "trial " << trial;
    ASSERT_EQ(r.mask, want.mask);

    // All-ones mask is ordinary convolution on every window that lies inside
    // the input; padding counts as holes, so border windows are rescaled.
    const Tensor ones({1, c.h, c.w}, 1.0);
    const auto full = partial_conv2d_forward(x, ones, k);
    const Tensor plain = conv2d_forward(x, k);
    const std::size_t oh = plain.dim(1), ow = plain.dim(2);
    for (std::size_t o = 0; o < c.cout; ++o)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t xx = 0; xx < ow; ++xx) {
          const bool inside = y * c.stride >= c.pad && xx * c.stride >= c.pad &&
                              y * c.stride + c.kh <= c.h + c.pad &&
                              xx * c.stride + c.kw <= c.w + c.pad;
          if (c.pad == 0) ASSERT_TRUE(inside);
          if (inside) ASSERT_NEAR(full.output.at(o, y, xx), plain.at(o, y, xx), 1e-12);
        }

    // Hole values never reach the output.
    Tensor scrambled = x;
    for (std::size_t ch = 0; ch < c.cin; ++ch)
      for (std::size_t i = 0; i < c.h * c.w; ++i)
        if (mask[(per_channel ? ch : 0) * c.h * c.w + i] == 0.0)
          scrambled[ch * c.h * c.w + i] = 1e6 * standard_normal(rng);
    const auto again = partial_conv2d_forward(scrambled, mask, k);
    ASSERT_EQ(again.output, r.output);

    // Windows with nothing valid give zero output and a zero updated mask.
    for (std::size_t i = 0; i < r.mask.size(); ++i) {
      if (want.mask[i] != 0.0) continue;
      ASSERT_EQ(r.mask[i], 0.0);
      for (std::size_t o = 0; o < c.cout; ++o) ASSERT_EQ(r.output[o * r.mask.size() + i], 0.0);
    }
  }
}

TEST(PartialConv, AllHoleMaskGivesZeros) {
  Rng rng(15);
  const ConvCase c{2, 3, 6, 6, 3, 3, 1, 1};
  const ConvKernel k = random_kernel(rng, c);
  const auto r = partial_conv2d_forward(random_tensor(rng, {2, 6, 6}), Tensor({1, 6, 6}), k);
  for (double v : r.output.values()) EXPECT_EQ(v, 0.0);
  for (double v : r.mask.values()) EXPECT_EQ(v, 0.0);
}

TEST(PartialConv, BackwardIgnoresHoles) {
  Rng rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const ConvCase c = random_case(rng);
    const ConvKernel k = random_kernel(rng, c);
    const Tensor x = random_tensor(rng, {c.cin, c.h, c.w});
    const Tensor mask = random_binary(rng, {1, c.h, c.w}, 0.6);
    const auto fwd = partial_conv2d_forward(x, mask, k);
    const Tensor dy = random_tensor(rng, fwd.output.shape());
    const ConvGrads g = partial_conv2d_backward(x, mask, k, dy);
    for (std::size_t ch = 0; ch < c.cin; ++ch)
      for (std::size_t i = 0; i < c.h * c.w; ++i)
        if (mask[i] == 0.0) ASSERT_EQ(g.input[ch * c.h * c.w + i], 0.0);
    // Linear in x for a fixed mask, so the adjoint identity holds here too.
    ConvKernel nobias = k;
    nobias.bias.fill(0.0);
    const Tensor y = partial_conv2d_forward(x, mask, nobias).output;
    EXPECT_NEAR(dot(g.input, x), dot(dy, y), 1e-8 * (1 + std::abs(dot(dy, y))));
  }
}

TEST(PartialConv, RejectsNonBinaryMask) {
  Rng rng(17);
  const ConvKernel k = random_kernel(rng, ConvCase{1, 1, 4, 4, 3, 3, 1, 1});
  Tensor mask({1, 4, 4}, 1.0);
  mask[3] = 0.5;
  EXPECT_THROW(partial_conv2d_forward(Tensor({1, 4, 4}), mask, k), ValidationError);
  EXPECT_THROW(partial_conv2d_forward(Tensor({1, 4, 4}), Tensor({1, 5, 4}), k), ShapeError);
}

TEST(MaxPool, CeilShapeAndFirstMaxTieBreak) {
  Tensor x({1, 3, 3}, std::vector<double>{1, 1, 2, 1, 1, 0, 5, 4, 3});
  const PoolResult p = maxpool2d(x);
  ASSERT_EQ(p.output.shape(), (Shape{1, 2, 2}));
  EXPECT_EQ(p.output[0], 1.0);
  EXPECT_EQ(p.argmax[0], 0u);  // four-way tie goes to the first cell
  EXPECT_EQ(p.output[1], 2.0);
  EXPECT_EQ(p.output[2], 5.0);
  EXPECT_EQ(p.output[3], 3.0);
  const Tensor g = maxpool2d_backward(p, Tensor({1, 2, 2}, std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(g, Tensor({1, 3, 3}, std::vector<double>{1, 0, 2, 0, 0, 0, 3, 0, 4}));
}

TEST(MaxPool, RoutesGradientToArgmaxOnly) {
  Rng rng(18);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor x = random_tensor(rng, {2, 3 + uniform_index(rng, 6), 3 + uniform_index(rng, 6)});
    const PoolResult p = maxpool2d(x);
    const Tensor dy = random_tensor(rng, p.output.shape());
    const Tensor g = maxpool2d_backward(p, dy);
    EXPECT_NEAR(dot(g, x), dot(dy, p.output), 1e-12);
    std::size_t nonzero = 0;
    for (double v : g.values()) nonzero += v != 0.0;
    EXPECT_EQ(nonzero, p.output.size());
  }
}

TEST(Upsample, AdjointPairs) {
  Rng rng(19);
  const Tensor x2 = random_tensor(rng, {2, 3, 4});
  const Tensor y2 = nearest_upsample2d(x2);
  ASSERT_EQ(y2.shape(), (Shape{2, 6, 8}));
  EXPECT_EQ(y2.at(1, 5, 7), x2.at(1, 2, 3));
  const Tensor dy2 = random_tensor(rng, y2.shape());
  EXPECT_NEAR(dot(nearest_upsample2d_backward(dy2), x2), dot(dy2, y2), 1e-12);

  const Tensor x1 = random_tensor(rng, {3, 5});
  const Tensor y1 = nearest_upsample1d(x1);
  const Tensor dy1 = random_tensor(rng, y1.shape());
  EXPECT_NEAR(dot(nearest_upsample1d_backward(dy1), x1), dot(dy1, y1), 1e-12);
  EXPECT_THROW(nearest_upsample2d_backward(Tensor({1, 3, 4})), ShapeError);
}

TEST(Dense, MatchesMatrixVectorProduct) {
  Rng rng(20);
  const Tensor w = random_tensor(rng, {4, 6});
  const Tensor b = random_tensor(rng, {4});
  const Tensor x = random_tensor(rng, {6});
  const Tensor y = dense_forward(x, w, b);
  for (std::size_t i = 0; i < 4; ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < 6; ++j) s += w.at(i, j) * x[j];
    EXPECT_NEAR(y[i], s, 1e-12);
  }
  const Tensor dy = random_tensor(rng, {4});
  const DenseGrads g = dense_backward(x, w, dy);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(g.weights.at(i, j), dy[i] * x[j], 1e-12);
  EXPECT_EQ(g.bias, dy);
  EXPECT_THROW(dense_forward(Tensor({5}), w, b), ShapeError);
}

TEST(Activations, ValuesAndDerivatives) {
  const Tensor x({4}, std::vector<double>{-2.0, -0.5, 0.5, 3.0});
  EXPECT_EQ(relu(x), Tensor({4}, std::vector<double>{0, 0, 0.5, 3.0}));
  EXPECT_EQ(leaky_relu(x, 0.2), Tensor({4}, std::vector<double>{-0.4, -0.1, 0.5, 3.0}));
  const Tensor up({4}, 1.0);
  EXPECT_EQ(relu_backward(x, up), Tensor({4}, std::vector<double>{0, 0, 1, 1}));
  EXPECT_EQ(leaky_relu_backward(x, 0.2, up), Tensor({4}, std::vector<double>{0.2, 0.2, 1, 1}));
  const Tensor s = sigmoid(x);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(s[i], 1.0 / (1.0 + std::exp(-x[i])), 1e-15);
    EXPECT_NEAR(sigmoid_backward(s, up)[i], s[i] * (1 - s[i]), 1e-15);
  }
  // Large negative inputs stay finite.
  EXPECT_TRUE(sigmoid(Tensor({1}, -800.0)).all_finite());
}

TEST(WeightedMse, ValueGradientAndErrors) {
  const Tensor pred({3}, std::vector<double>{1.0, 2.0, 4.0});
  const Tensor target({3}, std::vector<double>{0.0, 2.0, 2.0});
  const Tensor w({3}, std::vector<double>{6.0, 1.0, 0.0});
  const LossResult r = weighted_mse_loss(pred, target, w);
  EXPECT_NEAR(r.loss, 6.0 / 7.0, 1e-15);
  EXPECT_NEAR(r.grad[0], 2.0 * 6.0 * 1.0 / 7.0, 1e-15);
  EXPECT_EQ(r.grad[1], 0.0);
  EXPECT_EQ(r.grad[2], 0.0);
  EXPECT_THROW(weighted_mse_loss(pred, target, Tensor({3})), ValidationError);
  EXPECT_THROW(weighted_mse_loss(pred, target, Tensor({3}, -1.0)), ValidationError);
  EXPECT_THROW(weighted_mse_loss(pred, Tensor({2}), w), ShapeError);
}

TEST(Channels, ConcatSplitRoundTrip) {
  Rng rng(21);
  const Tensor a = random_tensor(rng, {2, 3, 3});
  const Tensor b = random_tensor(rng, {1, 3, 3});
  const Tensor c = concat_channels(a, b);
  ASSERT_EQ(c.shape(), (Shape{3, 3, 3}));
  const auto [a2, b2] = split_channels(c, 2);
  EXPECT_EQ(a2, a);
  EXPECT_EQ(b2, b);
  EXPECT_THROW(concat_channels(a, Tensor({1, 3, 4})), ShapeError);
}
