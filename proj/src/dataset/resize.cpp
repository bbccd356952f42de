#include <algorithm>
#include <cmath>
#include <vector>

#include "gridfill/dataset.hpp"
#include "gridfill/error.hpp"

namespace gridfill {

namespace {

struct Tap {
  std::size_t lo, hi;
  double w_lo, w_hi;
};

// Corner-aligned sampling positions of `out` points over `in` cells.
std::vector<Tap> taps(std::size_t in, std::size_t out) {
  std::vector<Tap> t(out);
  const double scale = out > 1 ? static_cast<double>(in - 1) / static_cast<double>(out - 1) : 0.0;
  for (std::size_t i = 0; i < out; ++i) {
    const double s = static_cast<double>(i) * scale;
    auto lo = static_cast<std::size_t>(std::floor(s));
    if (lo >= in - 1) lo = in - 1;
    const std::size_t hi = std::min(lo + 1, in - 1);
    const double frac = s - static_cast<double>(lo);
    t[i] = {lo, hi, 1.0 - frac, frac};
  }
  return t;
}

void require_2d(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected a 2D grid, got " + shape_str(t.shape()));
}

}  // namespace

Tensor resize_bilinear(const Tensor& grid, std::size_t out_h, std::size_t out_w) {
  require_2d(grid, "resize_bilinear");
  const std::size_t w = grid.dim(1);
  const auto ty = taps(grid.dim(0), out_h), tx = taps(w, out_w);
  Tensor out({out_h, out_w});
  for (std::size_t y = 0; y < out_h; ++y) {
    const auto& a = ty[y];
    for (std::size_t x = 0; x < out_w; ++x) {
      const auto& b = tx[x];
      out.at(y, x) = a.w_lo * (b.w_lo * grid[a.lo * w + b.lo] + b.w_hi * grid[a.lo * w + b.hi]) +
                     a.w_hi * (b.w_lo * grid[a.hi * w + b.lo] + b.w_hi * grid[a.hi * w + b.hi]);
    }
  }
  return out;
}

Tensor resize_bilinear_masked(const Tensor& grid, const Tensor& mask, std::size_t out_h,
                              std::size_t out_w) {
  require_2d(grid, "resize_bilinear_masked");
  require_same_shape(grid, mask, "resize_bilinear_masked");
  const std::size_t w = grid.dim(1);
  const auto ty = taps(grid.dim(0), out_h), tx = taps(w, out_w);
  Tensor out({out_h, out_w});
  for (std::size_t y = 0; y < out_h; ++y) {
    const auto& a = ty[y];
    for (std::size_t x = 0; x < out_w; ++x) {
      const auto& b = tx[x];
      const std::size_t idx[4] = {a.lo * w + b.lo, a.lo * w + b.hi, a.hi * w + b.lo, a.hi * w + b.hi};
      const bool all = mask[idx[0]] != 0.0 && mask[idx[1]] != 0.0 && mask[idx[2]] != 0.0 &&
                       mask[idx[3]] != 0.0;
      if (all) {
        out.at(y, x) = a.w_lo * (b.w_lo * grid[idx[0]] + b.w_hi * grid[idx[1]]) +
                       a.w_hi * (b.w_lo * grid[idx[2]] + b.w_hi * grid[idx[3]]);
        continue;
      }
      const double wt[4] = {a.w_lo * b.w_lo, a.w_lo * b.w_hi, a.w_hi * b.w_lo, a.w_hi * b.w_hi};
      double num = 0.0, den = 0.0;
      for (int k = 0; k < 4; ++k) {
        if (mask[idx[k]] == 0.0) continue;
        num += wt[k] * grid[idx[k]];
        den += wt[k];
      }
      out.at(y, x) = den > 0.0 ? num / den : 0.0;
    }
  }
  return out;
}

Tensor resize_nearest(const Tensor& grid, std::size_t out_h, std::size_t out_w) {
  require_2d(grid, "resize_nearest");
  const std::size_t h = grid.dim(0), w = grid.dim(1);
  auto src = [](std::size_t i, std::size_t in, std::size_t out) {
    if (out == 1) return std::size_t{0};
    return static_cast<std::size_t>(std::lround(static_cast<double>(i) * static_cast<double>(in - 1) /
                                                static_cast<double>(out - 1)));
  };
  Tensor out({out_h, out_w});
  for (std::size_t y = 0; y < out_h; ++y)
    for (std::size_t x = 0; x < out_w; ++x) out.at(y, x) = grid.at(src(y, h, out_h), src(x, w, out_w));
  return out;
}

Tensor sample_back(const Tensor& resized, std::size_t out_h, std::size_t out_w) {
  // Grid point i of the small grid sits at i * (R-1)/(n-1) on the resized grid,
  // so this is bilinear resampling in the other direction.
  return resize_bilinear(resized, out_h, out_w);
}

Tensor sample_back_adjoint(const Tensor& grad, std::size_t resized_h, std::size_t resized_w) {
  require_2d(grad, "sample_back_adjoint");
  const auto ty = taps(resized_h, grad.dim(0)), tx = taps(resized_w, grad.dim(1));
  Tensor out({resized_h, resized_w});
  for (std::size_t y = 0; y < grad.dim(0); ++y) {
    const auto& a = ty[y];
    for (std::size_t x = 0; x < grad.dim(1); ++x) {
      const auto& b = tx[x];
      const double g = grad.at(y, x);
      out.at(a.lo, b.lo) += a.w_lo * b.w_lo * g;
      out.at(a.lo, b.hi) += a.w_lo * b.w_hi * g;
      out.at(a.hi, b.lo) += a.w_hi * b.w_lo * g;
      out.at(a.hi, b.hi) += a.w_hi * b.w_hi * g;
    }
  }
  return out;
}

}  // namespace gridfill
