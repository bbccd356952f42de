#pragma once

// Straightforward reference implementations used as test oracles. They are
// written from the definitions with plain loops and share no code with the
// library kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gridfill/tensor.hpp"

namespace oracle {

using gridfill::Tensor;

inline std::size_t out_size(std::size_t in, std::size_t k, std::size_t s, std::size_t p) {
  return (in + 2 * p - k) / s + 1;
}

// Value of x at (c, y, x) with zero padding; y and x are signed.
inline double padded(const Tensor& t, std::size_t c, long y, long x) {
  if (y < 0 || x < 0 || y >= static_cast<long>(t.dim(1)) || x >= static_cast<long>(t.dim(2)))
    return 0.0;
  return t.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x));
}

// Plain seven-loop convolution over (C,H,W) with (O,C,kh,kw) weights.
inline Tensor conv2d(const Tensor& in, const Tensor& w, const Tensor& b, std::size_t stride,
                     std::size_t pad) {
  const std::size_t C = in.dim(0), H = in.dim(1), W = in.dim(2);
  const std::size_t O = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const std::size_t oh = out_size(H, kh, stride, pad), ow = out_size(W, kw, stride, pad);
  Tensor out({O, oh, ow});
  for (std::size_t o = 0; o < O; ++o)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = b[o];
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t i = 0; i < kh; ++i)
            for (std::size_t j = 0; j < kw; ++j) {
              const long yy = static_cast<long>(y * stride + i) - static_cast<long>(pad);
              const long xx = static_cast<long>(x * stride + j) - static_cast<long>(pad);
              acc += w[((o * C + c) * kh + i) * kw + j] * padded(in, c, yy, xx);
            }
        out.at(o, y, x) = acc;
      }
  return out;
}

// Conv over (C,L) with (O,C,k) weights.
inline Tensor conv1d(const Tensor& in, const Tensor& w, const Tensor& b, std::size_t stride,
                     std::size_t pad) {
  const std::size_t C = in.dim(0), L = in.dim(1), O = w.dim(0), k = w.dim(2);
  const std::size_t ol = out_size(L, k, stride, pad);
  Tensor out({O, ol});
  for (std::size_t o = 0; o < O; ++o)
    for (std::size_t x = 0; x < ol; ++x) {
      double acc = b[o];
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t j = 0; j < k; ++j) {
          const long xx = static_cast<long>(x * stride + j) - static_cast<long>(pad);
          if (xx >= 0 && xx < static_cast<long>(L)) acc += w[(o * C + c) * k + j] * in.at(c, xx);
        }
      out.at(o, x) = acc;
    }
  return out;
}

struct PartialOut {
  Tensor output;
  Tensor mask;
};

// Partial convolution straight from its definition. The mask is either one
// plane shared by all channels or one plane per channel.
inline PartialOut partial_conv2d(const Tensor& in, const Tensor& mask, const Tensor& w,
                                 const Tensor& b, std::size_t stride, std::size_t pad) {
  const std::size_t C = in.dim(0), H = in.dim(1), W = in.dim(2);
  const std::size_t O = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const std::size_t mc = mask.dim(0);
  const std::size_t oh = out_size(H, kh, stride, pad), ow = out_size(W, kw, stride, pad);
  PartialOut r{Tensor({O, oh, ow}), Tensor({1, oh, ow})};
  const double window = static_cast<double>(mc * kh * kw);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t c = 0; c < mc; ++c)
        for (std::size_t i = 0; i < kh; ++i)
          for (std::size_t j = 0; j < kw; ++j)
            s += padded(mask, c, static_cast<long>(y * stride + i) - static_cast<long>(pad),
                        static_cast<long>(x * stride + j) - static_cast<long>(pad));
      r.mask.at(0, y, x) = s > 0 ? 1.0 : 0.0;
      for (std::size_t o = 0; o < O; ++o) {
        if (s == 0) {
          r.output.at(o, y, x) = 0.0;
          continue;
        }
        double acc = 0.0;
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t i = 0; i < kh; ++i)
            for (std::size_t j = 0; j < kw; ++j) {
              const long yy = static_cast<long>(y * stride + i) - static_cast<long>(pad);
              const long xx = static_cast<long>(x * stride + j) - static_cast<long>(pad);
              const double m = padded(mask, mc == 1 ? 0 : c, yy, xx);
              acc += w[((o * C + c) * kh + i) * kw + j] * padded(in, c, yy, xx) * m;
            }
        r.output.at(o, y, x) = acc * window / s + b[o];
      }
    }
  return r;
}

// Weekly persistence by naive scanning: for every unreadable cell look back
// week by week for a readable one, then forward.
inline Tensor persistence(const Tensor& matrix, const Tensor& readable) {
  Tensor out = matrix;
  const long weeks = static_cast<long>(matrix.dim(1));
  for (std::size_t h = 0; h < matrix.dim(0); ++h)
    for (long w = 0; w < weeks; ++w) {
      if (readable.at(h, w) != 0.0) continue;
      long src = -1;
      for (long k = w - 1; k >= 0 && src < 0; --k)
        if (readable.at(h, k) != 0.0) src = k;
      for (long k = w + 1; k < weeks && src < 0; ++k)
        if (readable.at(h, k) != 0.0) src = k;
      if (src < 0) throw std::runtime_error("oracle: empty hour-of-week row");
      out.at(h, w) = matrix.at(h, src);
    }
  return out;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace oracle
