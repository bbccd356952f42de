#include "gridfill/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gridfill/error.hpp"

namespace gridfill {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

// Convolution geometry for a (C,H,W) input; 1D convs use H = kH = 1.
struct Geometry {
  std::size_t channels, height, width;
  std::size_t kernel_h, kernel_w;
  std::size_t stride_h, stride_w;
  std::size_t pad_h, pad_w;
  std::size_t out_h, out_w;

  std::size_t patch() const { return channels * kernel_h * kernel_w; }
  std::size_t positions() const { return out_h * out_w; }
};

// Range of output columns whose input column ox*stride + k - pad lies in
// [0, width).
struct Span {
  std::size_t lo, hi;
};

Span valid_span(std::size_t out, std::size_t width, std::size_t stride, std::size_t k,
                std::size_t pad) {
  const long off = static_cast<long>(k) - static_cast<long>(pad);
  const long s = static_cast<long>(stride);
  long lo = off >= 0 ? 0 : (-off + s - 1) / s;
  long hi = (static_cast<long>(width) - 1 - off) / s + 1;
  if (static_cast<long>(width) - 1 - off < 0) hi = 0;
  lo = std::min<long>(lo, static_cast<long>(out));
  hi = std::clamp<long>(hi, lo, static_cast<long>(out));
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

// Per-thread scratch buffers, reused across calls to avoid re-faulting
// large allocations.
double* scratch(std::size_t slot, std::size_t n) {
  thread_local Buffer buffers[3];
  auto& b = buffers[slot];
  if (b.size() < n) b.resize(n);
  return b.data();
}

// Column matrix of shape (C*kH*kW, (oy1-oy0)*outW) for output rows
// [oy0, oy1), written into `col`; zero where the window leaves the input.
void im2col(const double* src, const Geometry& g, std::size_t oy0, std::size_t oy1, double* col) {
  const std::size_t cols = (oy1 - oy0) * g.out_w;
  std::size_t row = 0;
  for (std::size_t c = 0; c < g.channels; ++c) {
    const double* plane = src + c * g.height * g.width;
    for (std::size_t ki = 0; ki < g.kernel_h; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel_w; ++kj, ++row) {
        double* dst = col + row * cols;
        const Span sx = valid_span(g.out_w, g.width, g.stride_w, kj, g.pad_w);
        for (std::size_t oy = oy0; oy < oy1; ++oy) {
          double* out = dst + (oy - oy0) * g.out_w;
          const long iy = static_cast<long>(oy * g.stride_h + ki) - static_cast<long>(g.pad_h);
          if (iy < 0 || iy >= static_cast<long>(g.height)) {
            std::fill(out, out + g.out_w, 0.0);
            continue;
          }
          const double* line = plane + static_cast<std::size_t>(iy) * g.width;
          std::fill(out, out + sx.lo, 0.0);
          if (sx.hi > sx.lo) {
            const double* first = line + (sx.lo * g.stride_w + kj - g.pad_w);
            if (g.stride_w == 1) {
              std::copy(first, first + (sx.hi - sx.lo), out + sx.lo);
            } else {
              for (std::size_t ox = sx.lo; ox < sx.hi; ++ox)
                out[ox] = first[(ox - sx.lo) * g.stride_w];
            }
          }
          std::fill(out + sx.hi, out + g.out_w, 0.0);
        }
      }
    }
  }
}

void col2im(const double* col, const Geometry& g, std::size_t oy0, std::size_t oy1, double* dst) {
  const std::size_t cols = (oy1 - oy0) * g.out_w;
  std::size_t row = 0;
  for (std::size_t c = 0; c < g.channels; ++c) {
    double* plane = dst + c * g.height * g.width;
    for (std::size_t ki = 0; ki < g.kernel_h; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel_w; ++kj, ++row) {
        const double* src = col + row * cols;
        const Span sx = valid_span(g.out_w, g.width, g.stride_w, kj, g.pad_w);
        for (std::size_t oy = oy0; oy < oy1; ++oy) {
          const long iy = static_cast<long>(oy * g.stride_h + ki) - static_cast<long>(g.pad_h);
          if (iy < 0 || iy >= static_cast<long>(g.height)) continue;
          double* line = plane + static_cast<std::size_t>(iy) * g.width;
          const double* in = src + (oy - oy0) * g.out_w;
          for (std::size_t ox = sx.lo; ox < sx.hi; ++ox)
            line[ox * g.stride_w + kj - g.pad_w] += in[ox];
        }
      }
    }
  }
}

void check_kernel(const ConvKernel& k, std::size_t rank, const char* op) {
  if (k.weights.rank() != rank) {
    throw ShapeError(std::string(op) + ": kernel weights must have rank " +
                     std::to_string(rank) + ", got " + shape_str(k.weights.shape()));
  }
  if (k.bias.shape() != Shape{k.weights.dim(0)}) {
    throw ShapeError(std::string(op) + ": bias shape " + shape_str(k.bias.shape()) +
                     " does not match weights " + shape_str(k.weights.shape()));
  }
  if (k.stride == 0) throw ShapeError(std::string(op) + ": stride must be positive");
}

Geometry geometry_2d(const Tensor& input, const ConvKernel& k, const char* op) {
  check_kernel(k, 4, op);
  if (input.rank() != 3 || input.dim(0) != k.in_channels()) {
    throw ShapeError(std::string(op) + ": input " + shape_str(input.shape()) +
                     " incompatible with kernel " + shape_str(k.weights.shape()));
  }
  Geometry g{input.dim(0), input.dim(1), input.dim(2), k.kernel_h(), k.kernel_w(),
             k.stride, k.stride, k.padding, k.padding, 0, 0};
  g.out_h = conv_out_size(g.height, g.kernel_h, g.stride_h, g.pad_h);
  g.out_w = conv_out_size(g.width, g.kernel_w, g.stride_w, g.pad_w);
  return g;
}

Geometry geometry_1d(const Tensor& input, const ConvKernel& k, const char* op) {
  check_kernel(k, 3, op);
  if (input.rank() != 2 || input.dim(0) != k.in_channels()) {
    throw ShapeError(std::string(op) + ": input " + shape_str(input.shape()) +
                     " incompatible with kernel " + shape_str(k.weights.shape()));
  }
  Geometry g{input.dim(0), 1, input.dim(1), 1, k.kernel_w(), 1, k.stride, 0, k.padding, 1, 0};
  g.out_w = conv_out_size(g.width, g.kernel_w, g.stride_w, g.pad_w);
  return g;
}

void check_upstream(const Tensor& upstream, const Shape& expected, const char* op) {
  if (upstream.shape() != expected) {
    throw ShapeError(std::string(op) + ": upstream gradient " + shape_str(upstream.shape()) +
                     " does not match output " + shape_str(expected));
  }
}

using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

// Output rows per block, sized so a block's column matrix stays in cache.
std::size_t block_rows(const Geometry& g) {
  constexpr std::size_t kBlockDoubles = 32 * 1024;
  const std::size_t per_row = g.patch() * g.out_w;
  return std::clamp<std::size_t>(kBlockDoubles / std::max<std::size_t>(per_row, 1), 1, g.out_h);
}

// out(cout, positions) = W * im2col(in), no bias.
void conv_raw_forward(const double* in, const Geometry& g, const double* w, std::size_t cout,
                      double* out) {
  const std::size_t rows = block_rows(g);
  double* col = scratch(0, g.patch() * rows * g.out_w);
  const auto npos = static_cast<Eigen::Index>(g.positions());
  ConstMap wm(w, cout, g.patch());
  for (std::size_t oy0 = 0; oy0 < g.out_h; oy0 += rows) {
    const std::size_t oy1 = std::min(g.out_h, oy0 + rows);
    const std::size_t n = (oy1 - oy0) * g.out_w;
    im2col(in, g, oy0, oy1, col);
    StridedMap(out + oy0 * g.out_w, cout, n, Eigen::OuterStride<>(npos)).noalias() =
        wm * ConstMap(col, g.patch(), n);
  }
}

// dw(cout, patch) = dy * im2col(in)^T and dx = col2im(W^T dy).
void conv_raw_backward(const double* in, const Geometry& g, const double* w, std::size_t cout,
                       const double* dy, double* dw, double* dx) {
  const std::size_t rows = block_rows(g);
  double* col = scratch(0, g.patch() * rows * g.out_w);
  double* dcol = scratch(1, g.patch() * rows * g.out_w);
  const auto npos = static_cast<Eigen::Index>(g.positions());
  ConstMap wm(w, cout, g.patch());
  MutMap dwm(dw, cout, g.patch());
  dwm.setZero();
  for (std::size_t oy0 = 0; oy0 < g.out_h; oy0 += rows) {
    const std::size_t oy1 = std::min(g.out_h, oy0 + rows);
    const std::size_t n = (oy1 - oy0) * g.out_w;
    im2col(in, g, oy0, oy1, col);
    ConstStridedMap dyb(dy + oy0 * g.out_w, cout, n, Eigen::OuterStride<>(npos));
    dwm.noalias() += dyb * ConstMap(col, g.patch(), n).transpose();
    MutMap(dcol, g.patch(), n).noalias() = wm.transpose() * dyb;
    col2im(dcol, g, oy0, oy1, dx);
  }
}

Tensor conv_forward_impl(const Tensor& input, const ConvKernel& k, const Geometry& g,
                         Shape out_shape) {
  require_finite(input, "convolution");
  const std::size_t cout = k.out_channels();
  Tensor out(std::move(out_shape));
  conv_raw_forward(input.data(), g, k.weights.data(), cout, out.data());
  for (std::size_t o = 0; o < cout; ++o) {
    double* row = out.data() + o * g.positions();
    for (std::size_t p = 0; p < g.positions(); ++p) row[p] += k.bias[o];
  }
  return out;
}

ConvGrads conv_backward_impl(const Tensor& input, const ConvKernel& k, const Geometry& g,
                             const Tensor& upstream) {
  const std::size_t cout = k.out_channels();
  ConvGrads grads{Tensor(input.shape()), Tensor(k.weights.shape()), Tensor(k.bias.shape())};
  ConstMap dy(upstream.data(), cout, g.positions());
  for (std::size_t o = 0; o < cout; ++o) grads.bias[o] = dy.row(o).sum();
  conv_raw_backward(input.data(), g, k.weights.data(), cout, upstream.data(), grads.weights.data(),
                    grads.input.data());
  return grads;
}

}  // namespace

std::size_t conv_out_size(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
  if (stride == 0) throw ShapeError("stride must be positive");
  const long span = static_cast<long>(in + 2 * pad) - static_cast<long>(k);
  if (span < 0) {
    throw ShapeError("kernel " + std::to_string(k) + " larger than padded input " +
                     std::to_string(in + 2 * pad));
  }
  return static_cast<std::size_t>(span) / stride + 1;
}

Tensor conv2d_forward(const Tensor& input, const ConvKernel& kernel) {
  const auto g = geometry_2d(input, kernel, "conv2d");
  return conv_forward_impl(input, kernel, g, {kernel.out_channels(), g.out_h, g.out_w});
}

ConvGrads conv2d_backward(const Tensor& input, const ConvKernel& kernel, const Tensor& upstream) {
  const auto g = geometry_2d(input, kernel, "conv2d_backward");
  check_upstream(upstream, {kernel.out_channels(), g.out_h, g.out_w}, "conv2d_backward");
  return conv_backward_impl(input, kernel, g, upstream);
}

Tensor conv1d_forward(const Tensor& input, const ConvKernel& kernel) {
  const auto g = geometry_1d(input, kernel, "conv1d");
  return conv_forward_impl(input, kernel, g, {kernel.out_channels(), g.out_w});
}

ConvGrads conv1d_backward(const Tensor& input, const ConvKernel& kernel, const Tensor& upstream) {
  const auto g = geometry_1d(input, kernel, "conv1d_backward");
  check_upstream(upstream, {kernel.out_channels(), g.out_w}, "conv1d_backward");
  return conv_backward_impl(input, kernel, g, upstream);
}

// ---------------------------------------------------------------------------
// Partial convolution

namespace {

struct MaskedInput {
  Tensor masked;                // X * M
  std::vector<double> ratio;    // K / S per output position, 0 where S == 0
};

MaskedInput prepare_partial(const Tensor& input, const Tensor& mask, const Geometry& g,
                            const char* op) {
  if (mask.rank() != 3 || mask.dim(1) != input.dim(1) || mask.dim(2) != input.dim(2) ||
      (mask.dim(0) != 1 && mask.dim(0) != input.dim(0))) {
    throw ShapeError(std::string(op) + ": mask " + shape_str(mask.shape()) +
                     " incompatible with input " + shape_str(input.shape()));
  }
  for (double m : mask.values()) {
    if (m != 0.0 && m != 1.0) throw ValidationError(std::string(op) + ": mask must be binary");
  }

  const std::size_t plane = g.height * g.width;
  MaskedInput prep{Tensor(input.shape()), {}};
  const bool broadcast = mask.dim(0) == 1;
  for (std::size_t c = 0; c < g.channels; ++c) {
    const double* m = mask.data() + (broadcast ? 0 : c * plane);
    const double* x = input.data() + c * plane;
    double* dst = prep.masked.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) dst[i] = x[i] * m[i];
  }

  // S = number of valid cells under each window, summed over channels. The
  // channel sum is taken first, so the window pass runs on one plane.
  std::vector<double> plane_sum(mask.data(), mask.data() + plane);
  for (std::size_t c = 1; c < mask.dim(0); ++c) {
    const double* m = mask.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) plane_sum[i] += m[i];
  }
  prep.ratio.assign(g.positions(), 0.0);
  for (std::size_t ki = 0; ki < g.kernel_h; ++ki) {
    for (std::size_t kj = 0; kj < g.kernel_w; ++kj) {
      const Span sx = valid_span(g.out_w, g.width, g.stride_w, kj, g.pad_w);
      for (std::size_t oy = 0; oy < g.out_h; ++oy) {
        const long iy = static_cast<long>(oy * g.stride_h + ki) - static_cast<long>(g.pad_h);
        if (iy < 0 || iy >= static_cast<long>(g.height)) continue;
        const double* line = plane_sum.data() + static_cast<std::size_t>(iy) * g.width;
        double* out = prep.ratio.data() + oy * g.out_w;
        for (std::size_t ox = sx.lo; ox < sx.hi; ++ox) out[ox] += line[ox * g.stride_w + kj - g.pad_w];
      }
    }
  }
  const double window = static_cast<double>(mask.dim(0) * g.kernel_h * g.kernel_w);
  for (auto& s : prep.ratio) s = s > 0.0 ? window / s : 0.0;
  return prep;
}

}  // namespace

PartialConvResult partial_conv2d_forward(const Tensor& input, const Tensor& mask,
                                         const ConvKernel& kernel) {
  const auto g = geometry_2d(input, kernel, "partial_conv2d");
  require_finite(input, "partial_conv2d");
  const auto prep = prepare_partial(input, mask, g, "partial_conv2d");
  const std::size_t cout = kernel.out_channels();
  const std::size_t npos = g.positions();
  PartialConvResult res{Tensor({cout, g.out_h, g.out_w}), Tensor({1, g.out_h, g.out_w})};
  conv_raw_forward(prep.masked.data(), g, kernel.weights.data(), cout, res.output.data());
  for (std::size_t o = 0; o < cout; ++o) {
    double* row = res.output.data() + o * npos;
    for (std::size_t p = 0; p < npos; ++p) {
      row[p] = prep.ratio[p] > 0.0 ? row[p] * prep.ratio[p] + kernel.bias[o] : 0.0;
    }
  }
  for (std::size_t p = 0; p < npos; ++p) res.mask[p] = prep.ratio[p] > 0.0 ? 1.0 : 0.0;
  return res;
}

ConvGrads partial_conv2d_backward(const Tensor& input, const Tensor& mask,
                                  const ConvKernel& kernel, const Tensor& upstream) {
  const auto g = geometry_2d(input, kernel, "partial_conv2d_backward");
  const std::size_t cout = kernel.out_channels();
  const std::size_t npos = g.positions();
  check_upstream(upstream, {cout, g.out_h, g.out_w}, "partial_conv2d_backward");
  const auto prep = prepare_partial(input, mask, g, "partial_conv2d_backward");

  // d(raw) = dY * ratio, zero where the window saw no valid cell.
  Tensor draw(upstream.shape());
  ConvGrads grads{Tensor(input.shape()), Tensor(kernel.weights.shape()),
                  Tensor(kernel.bias.shape())};
  for (std::size_t o = 0; o < cout; ++o) {
    const double* dy = upstream.data() + o * npos;
    double* d = draw.data() + o * npos;
    double bias_grad = 0.0;
    for (std::size_t p = 0; p < npos; ++p) {
      if (prep.ratio[p] > 0.0) {
        d[p] = dy[p] * prep.ratio[p];
        bias_grad += dy[p];
      }
    }
    grads.bias[o] = bias_grad;
  }

  conv_raw_backward(prep.masked.data(), g, kernel.weights.data(), cout, draw.data(),
                    grads.weights.data(), grads.input.data());

  const std::size_t plane = g.height * g.width;
  const bool broadcast = mask.dim(0) == 1;
  for (std::size_t c = 0; c < g.channels; ++c) {
    const double* m = mask.data() + (broadcast ? 0 : c * plane);
    double* gi = grads.input.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) gi[i] *= m[i];
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Pooling and resampling

PoolResult maxpool2d(const Tensor& input, std::size_t window, std::size_t stride) {
  if (input.rank() != 3) throw ShapeError("maxpool2d: expected (C,H,W), got " + shape_str(input.shape()));
  if (window == 0 || stride == 0) throw ShapeError("maxpool2d: window and stride must be positive");
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t oh = (h + stride - 1) / stride, ow = (w + stride - 1) / stride;
  PoolResult res{Tensor({c, oh, ow}), std::vector<std::size_t>(c * oh * ow), input.shape()};
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        bool found = false;
        for (std::size_t i = 0; i < window; ++i) {
          const std::size_t y = oy * stride + i;
          if (y >= h) continue;
          for (std::size_t j = 0; j < window; ++j) {
            const std::size_t x = ox * stride + j;
            if (x >= w) continue;
            const std::size_t idx = (ch * h + y) * w + x;
            if (!found || input[idx] > best) {
              best = input[idx];
              best_idx = idx;
              found = true;
            }
          }
        }
        const std::size_t o = (ch * oh + oy) * ow + ox;
        res.output[o] = best;
        res.argmax[o] = best_idx;
      }
    }
  }
  return res;
}

Tensor maxpool2d_backward(const PoolResult& pooled, const Tensor& upstream) {
  require_same_shape(upstream, pooled.output, "maxpool2d_backward");
  Tensor grad(pooled.input_shape);
  for (std::size_t o = 0; o < upstream.size(); ++o) grad[pooled.argmax[o]] += upstream[o];
  return grad;
}

Tensor nearest_upsample2d(const Tensor& input, std::size_t factor) {
  if (input.rank() != 3) throw ShapeError("nearest_upsample2d: expected (C,H,W), got " + shape_str(input.shape()));
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  Tensor out({c, h * factor, w * factor});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h * factor; ++y)
      for (std::size_t x = 0; x < w * factor; ++x)
        out.at(ch, y, x) = input.at(ch, y / factor, x / factor);
  return out;
}

Tensor nearest_upsample2d_backward(const Tensor& upstream, std::size_t factor) {
  if (upstream.rank() != 3 || upstream.dim(1) % factor || upstream.dim(2) % factor) {
    throw ShapeError("nearest_upsample2d_backward: bad upstream " + shape_str(upstream.shape()));
  }
  const std::size_t c = upstream.dim(0), h = upstream.dim(1) / factor, w = upstream.dim(2) / factor;
  Tensor grad({c, h, w});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h * factor; ++y)
      for (std::size_t x = 0; x < w * factor; ++x)
        grad.at(ch, y / factor, x / factor) += upstream.at(ch, y, x);
  return grad;
}

Tensor nearest_upsample1d(const Tensor& input, std::size_t factor) {
  if (input.rank() != 2) throw ShapeError("nearest_upsample1d: expected (C,L), got " + shape_str(input.shape()));
  const std::size_t c = input.dim(0), l = input.dim(1);
  Tensor out({c, l * factor});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < l * factor; ++i) out.at(ch, i) = input.at(ch, i / factor);
  return out;
}

Tensor nearest_upsample1d_backward(const Tensor& upstream, std::size_t factor) {
  if (upstream.rank() != 2 || upstream.dim(1) % factor) {
    throw ShapeError("nearest_upsample1d_backward: bad upstream " + shape_str(upstream.shape()));
  }
  const std::size_t c = upstream.dim(0), l = upstream.dim(1) / factor;
  Tensor grad({c, l});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < l * factor; ++i) grad.at(ch, i / factor) += upstream.at(ch, i);
  return grad;
}

// ---------------------------------------------------------------------------
// Dense

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (weights.rank() != 2 || input.size() != weights.dim(1) || bias.shape() != Shape{weights.dim(0)}) {
    throw ShapeError("dense: input " + shape_str(input.shape()) + " weights " +
                     shape_str(weights.shape()) + " bias " + shape_str(bias.shape()));
  }
  require_finite(input, "dense");
  const std::size_t m = weights.dim(0), n = weights.dim(1);
  Tensor out({m});
  Eigen::Map<Eigen::VectorXd>(out.data(), m).noalias() =
      ConstMap(weights.data(), m, n) * Eigen::Map<const Eigen::VectorXd>(input.data(), n);
  for (std::size_t i = 0; i < m; ++i) out[i] += bias[i];
  return out;
}

DenseGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream) {
  if (weights.rank() != 2 || input.size() != weights.dim(1) || upstream.size() != weights.dim(0)) {
    throw ShapeError("dense_backward: input " + shape_str(input.shape()) + " weights " +
                     shape_str(weights.shape()) + " upstream " + shape_str(upstream.shape()));
  }
  const std::size_t m = weights.dim(0), n = weights.dim(1);
  Eigen::Map<const Eigen::VectorXd> x(input.data(), n), dy(upstream.data(), m);
  DenseGrads g{Tensor(input.shape()), Tensor(weights.shape()), Tensor({m})};
  MutMap(g.weights.data(), m, n).noalias() = dy * x.transpose();
  Eigen::Map<Eigen::VectorXd>(g.input.data(), n).noalias() =
      ConstMap(weights.data(), m, n).transpose() * dy;
  for (std::size_t i = 0; i < m; ++i) g.bias[i] = upstream[i];
  return g;
}

// ---------------------------------------------------------------------------
// Activations

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.raw()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& upstream) {
  require_same_shape(x, upstream, "relu_backward");
  Tensor g = upstream;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(x[i] > 0.0)) g[i] = 0.0;
  return g;
}

Tensor leaky_relu(const Tensor& x, double alpha) {
  Tensor y = x;
  for (auto& v : y.raw()) v = v > 0.0 ? v : alpha * v;
  return y;
}

Tensor leaky_relu_backward(const Tensor& x, double alpha, const Tensor& upstream) {
  require_same_shape(x, upstream, "leaky_relu_backward");
  Tensor g = upstream;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(x[i] > 0.0)) g[i] *= alpha;
  return g;
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.raw()) {
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  return y;
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& upstream) {
  require_same_shape(y, upstream, "sigmoid_backward");
  Tensor g = upstream;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= y[i] * (1.0 - y[i]);
  return g;
}

// ---------------------------------------------------------------------------

LossResult weighted_mse_loss(const Tensor& pred, const Tensor& target, const Tensor& weight) {
  require_same_shape(pred, target, "weighted_mse_loss");
  require_same_shape(pred, weight, "weighted_mse_loss");
  double wsum = 0.0;
  for (double w : weight.values()) {
    if (w < 0.0 || !std::isfinite(w)) throw ValidationError("weighted_mse_loss: weights must be finite and >= 0");
    wsum += w;
  }
  if (wsum <= 0.0) throw ValidationError("weighted_mse_loss: all weights are zero");
  LossResult r{0.0, Tensor(pred.shape())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (weight[i] == 0.0) continue;
    const double d = pred[i] - target[i];
    r.loss += weight[i] * d * d;
    r.grad[i] = 2.0 * weight[i] * d / wsum;
  }
  r.loss /= wsum;
  return r;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.rank() != b.rank() || a.rank() < 2 ||
      !std::equal(a.shape().begin() + 1, a.shape().end(), b.shape().begin() + 1)) {
    throw ShapeError("concat_channels: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  Shape s = a.shape();
  s[0] += b.dim(0);
  Buffer data;
  data.reserve(a.size() + b.size());
  data.insert(data.end(), a.raw().begin(), a.raw().end());
  data.insert(data.end(), b.raw().begin(), b.raw().end());
  return Tensor(std::move(s), std::move(data));
}

std::pair<Tensor, Tensor> split_channels(const Tensor& t, std::size_t channels_a) {
  if (t.rank() < 2 || channels_a == 0 || channels_a >= t.dim(0)) {
    throw ShapeError("split_channels: cannot split " + shape_str(t.shape()) + " at " +
                     std::to_string(channels_a));
  }
  const std::size_t plane = t.size() / t.dim(0);
  Shape sa = t.shape(), sb = t.shape();
  sa[0] = channels_a;
  sb[0] = t.dim(0) - channels_a;
  const auto mid = t.raw().begin() + static_cast<std::ptrdiff_t>(channels_a * plane);
  return {Tensor(sa, Buffer(t.raw().begin(), mid)),
          Tensor(sb, Buffer(mid, t.raw().end()))};
}

}  // namespace gridfill
