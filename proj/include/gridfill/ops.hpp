#pragma once

// Forward and backward kernels for the fixed layer set used by the imputation
// networks. Every function is pure: it reads its arguments and returns fresh
// tensors, so distinct calls may run concurrently.

#include <cstddef>
#include <vector>

#include "gridfill/tensor.hpp"

namespace gridfill {

/// Convolution parameters. Weights are (out, in, kH, kW) for 2D and
/// (out, in, k) for 1D; bias is (out).
struct ConvKernel {
  Tensor weights;
  Tensor bias;
  std::size_t stride = 1;
  std::size_t padding = 0;

  std::size_t out_channels() const { return weights.dim(0); }
  std::size_t in_channels() const { return weights.dim(1); }
  std::size_t kernel_h() const { return weights.rank() == 4 ? weights.dim(2) : 1; }
  std::size_t kernel_w() const { return weights.dim(weights.rank() - 1); }
};

struct ConvGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

/// floor((in + 2*pad - k) / stride) + 1; throws ShapeError when that is < 1.
std::size_t conv_out_size(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad);

Tensor conv2d_forward(const Tensor& input, const ConvKernel& kernel);
ConvGrads conv2d_backward(const Tensor& input, const ConvKernel& kernel, const Tensor& upstream);

Tensor conv1d_forward(const Tensor& input, const ConvKernel& kernel);
ConvGrads conv1d_backward(const Tensor& input, const ConvKernel& kernel, const Tensor& upstream);

struct PartialConvResult {
  Tensor output;  // (C_out, H', W')
  Tensor mask;    // (1, H', W'), binary
};

/// Partial convolution. `mask` is (1,H,W), broadcast over input channels, or
/// (C_in,H,W) with one plane per channel. For each output window with
/// S = sum(mask over window) and K = window element count:
///   out = W.(X*M) * K/S + b  if S > 0, else 0;  new mask = [S > 0].
/// Padding cells count as mask = 0.
PartialConvResult partial_conv2d_forward(const Tensor& input, const Tensor& mask,
                                         const ConvKernel& kernel);

/// Gradients with the mask held constant; grad.input is zero wherever the
/// mask is zero.
ConvGrads partial_conv2d_backward(const Tensor& input, const Tensor& mask,
                                  const ConvKernel& kernel, const Tensor& upstream);

/// Max pooling over (C,H,W). Dims not divisible by the window are padded on
/// the right/bottom with -inf so the output is ceil(H/stride) x ceil(W/stride).
/// Ties go to the first maximal element in row-major window order.
struct PoolResult {
  Tensor output;
  std::vector<std::size_t> argmax;  // flat input index per output cell
  Shape input_shape;
};

PoolResult maxpool2d(const Tensor& input, std::size_t window = 2, std::size_t stride = 2);
Tensor maxpool2d_backward(const PoolResult& pooled, const Tensor& upstream);

/// Nearest-neighbour replication of the trailing spatial axes, (C,H,W) or (C,L).
Tensor nearest_upsample2d(const Tensor& input, std::size_t factor = 2);
Tensor nearest_upsample2d_backward(const Tensor& upstream, std::size_t factor = 2);
Tensor nearest_upsample1d(const Tensor& input, std::size_t factor = 2);
Tensor nearest_upsample1d_backward(const Tensor& upstream, std::size_t factor = 2);

struct DenseGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

/// y = W x + b with x of length N, W (M,N), b (M).
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);
DenseGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& upstream);
Tensor leaky_relu(const Tensor& x, double alpha);
Tensor leaky_relu_backward(const Tensor& x, double alpha, const Tensor& upstream);
Tensor sigmoid(const Tensor& x);
/// Takes the sigmoid *output*, not its input.
Tensor sigmoid_backward(const Tensor& y, const Tensor& upstream);

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d pred
};

/// sum(w * (pred - target)^2) / sum(w). Throws ValidationError when all
/// weights are zero or any weight is negative.
LossResult weighted_mse_loss(const Tensor& pred, const Tensor& target, const Tensor& weight);

/// Stack (C_a,...) and (C_b,...) along the channel axis.
Tensor concat_channels(const Tensor& a, const Tensor& b);
/// Inverse of concat_channels for a gradient: first `channels_a` planes and the rest.
std::pair<Tensor, Tensor> split_channels(const Tensor& t, std::size_t channels_a);

}  // namespace gridfill
