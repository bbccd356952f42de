#include "gridfill/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gridfill/ops.hpp"
#include "gridfill/rng.hpp"

namespace gridfill {

Tensor numeric_gradient(const ScalarFn& f, const Tensor& point, double step) {
  Tensor x = point;
  Tensor grad(point.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + step;
    const double up = f(x);
    x[i] = orig - step;
    const double down = f(x);
    x[i] = orig;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double max_relative_error(const Tensor& analytic, const Tensor& numeric) {
  require_same_shape(analytic, numeric, "max_relative_error");
  double scale = 0.0;
  for (double a : analytic.values()) scale = std::max(scale, std::abs(a));
  const double floor = std::max(1e-3 * scale, 1e-12);
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i], n = numeric[i];
    const double denom = std::max({std::abs(a), std::abs(n), floor});
    worst = std::max(worst, std::abs(a - n) / denom);
  }
  return worst;
}

GradCheckReport grad_check(std::string op, const ScalarFn& f, const GradFn& grad,
                           const Tensor& point, double tolerance, double step) {
  const Tensor analytic = grad(point);
  const Tensor numeric = numeric_gradient(f, point, step);
  GradCheckReport r{std::move(op), max_relative_error(analytic, numeric), tolerance, false};
  r.pass = r.max_rel_error <= tolerance;
  return r;
}

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.raw()) v = uniform(rng, lo, hi);
  return t;
}

// Values bounded away from zero, for checks across activation kinks.
Tensor random_away_from_zero(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.raw()) {
    const double mag = uniform(rng, 1e-2, 1.0);
    v = uniform01(rng) < 0.5 ? -mag : mag;
  }
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

using Args = std::vector<Tensor>;
using Forward = std::function<Tensor(const Args&)>;
using Backward = std::function<Args(const Args&, const Tensor& upstream)>;

// Projects the layer output on a random direction r and checks the gradient
// of <r, layer(args)> with respect to each argument listed in `check`.
GradCheckReport check_layer(const std::string& op, const Args& args, const Forward& fwd,
                            const Backward& bwd, const std::vector<std::size_t>& check,
                            Rng& rng, double tolerance, bool corrupt) {
  const Tensor probe = random_tensor(fwd(args).shape(), rng);
  const Args grads = bwd(args, probe);
  GradCheckReport worst{op, 0.0, tolerance, true};
  for (std::size_t which : check) {
    auto f = [&](const Tensor& x) {
      Args a = args;
      a[which] = x;
      return dot(probe, fwd(a));
    };
    auto g = [&](const Tensor&) {
      Tensor t = grads[which];
      if (corrupt) t *= 2.0;
      return t;
    };
    auto r = grad_check(op, f, g, args[which], tolerance);
    worst.max_rel_error = std::max(worst.max_rel_error, r.max_rel_error);
  }
  worst.pass = worst.max_rel_error <= tolerance;
  return worst;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return static_cast<std::size_t>(uniform_int(rng, static_cast<long>(lo), static_cast<long>(hi)));
}

GradCheckReport check_conv2d(std::uint64_t seed, double tol, bool corrupt) {
  Rng rng(seed);
  const std::size_t cin = pick(rng, 1, 3), cout = pick(rng, 1, 4), k = pick(rng, 1, 3);
  const std::size_t stride = pick(rng, 1, 2), pad = pick(rng, 0, 1);
  const std::size_t h = pick(rng, k + 1, 7), w = pick(rng, k + 1, 7);
  Args args{random_tensor({cin, h, w}, rng), random_tensor({cout, cin, k, k}, rng),
            random_tensor({cout}, rng)};
  auto kernel = [=](const Args& a) { return ConvKernel{a[1], a[2], stride, pad}; };
  return check_layer(
      "conv2d", args, [&](const Args& a) { return conv2d_forward(a[0], kernel(a)); },
      [&](const Args& a, const Tensor& up) {
        auto g = conv2d_backward(a[0], kernel(a), up);
        return Args{g.input, g.weights, g.bias};
      },
      {0, 1, 2}, rng, tol, corrupt);
}

GradCheckReport check_conv1d(std::uint64_t seed, double tol, bool corrupt) {
  Rng rng(seed);
  const std::size_t cin = pick(rng, 1, 3), cout = pick(rng, 1, 4), k = pick(rng, 1, 7);
  const std::size_t stride = pick(rng, 1, 2), pad = pick(rng, 0, k / 2);
  const std::size_t len = pick(rng, k + 1, 20);
  Args args{random_tensor({cin, len}, rng), random_tensor({cout, cin, k}, rng),
            random_tensor({cout}, rng)};
  auto kernel = [=](const Args& a) { return ConvKernel{a[1], a[2], stride, pad}; };
  return check_layer(
      "conv1d", args, [&](const Args& a) { return conv1d_forward(a[0], kernel(a)); },
      [&](const Args& a, const Tensor& up) {
        auto g = conv1d_backward(a[0], kernel(a), up);
        return Args{g.input, g.weights, g.bias};
      },
      {0, 1, 2}, rng, tol, corrupt);
}

GradCheckReport check_partial_conv2d(std::uint64_t seed, double tol, bool corrupt) {
  Rng rng(seed);
  const std::size_t cin = pick(rng, 1, 3), cout = pick(rng, 1, 4), k = pick(rng, 1, 3);
  const std::size_t stride = pick(rng, 1, 2), pad = pick(rng, 0, 1);
  const std::size_t h = pick(rng, k + 1, 7), w = pick(rng, k + 1, 7);
  const bool per_channel = uniform01(rng) < 0.5;
  Tensor mask({per_channel ? cin : 1, h, w});
  for (auto& m : mask.raw()) m = uniform01(rng) < 0.6 ? 1.0 : 0.0;
  Args args{random_tensor({cin, h, w}, rng), random_tensor({cout, cin, k, k}, rng),
            random_tensor({cout}, rng)};
  auto kernel = [=](const Args& a) { return ConvKernel{a[1], a[2], stride, pad}; };
  return check_layer(
      "partial_conv2d", args,
      [&](const Args& a) { return partial_conv2d_forward(a[0], mask, kernel(a)).output; },
      [&](const Args& a, const Tensor& up) {
        auto g = partial_conv2d_backward(a[0], mask, kernel(a), up);
        return Args{g.input, g.weights, g.bias};
      },
      {0, 1, 2}, rng, tol, corrupt);
}

GradCheckReport check_dense(std::uint64_t seed, double tol, bool corrupt) {
  Rng rng(seed);
  const std::size_t n = pick(rng, 1, 12), m = pick(rng, 1, 12);
  Args args{random_tensor({n}, rng), random_tensor({m, n}, rng), random_tensor({m}, rng)};
  return check_layer(
      "dense", args, [](const Args& a) { return dense_forward(a[0], a[1], a[2]); },
      [](const Args& a, const Tensor& up) {
        auto g = dense_backward(a[0], a[1], up);
        return Args{g.input, g.weights, g.bias};
      },
      {0, 1, 2}, rng, tol, corrupt);
}

GradCheckReport check_maxpool(std::uint64_t seed, double tol, bool corrupt) {
  Rng rng(seed);
  const std::size_t c = pick(rng, 1, 3), h = pick(rng, 2, 7), w = pick(rng, 2, 7);
  // Distinct values spaced well beyond the difference step, so no window
  // holds a near-tie.
  Tensor x({c, h, w});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) * 0.01;
  shuffle(x.raw().begin(), x.raw().end(), rng);
  for (auto& v : x.raw()) v += uniform(rng, 0.0, 1e-3);
  return check_layer(
      "maxpool2d", Args{x}, [](const Args& a) { return maxpool2d(a[0]).output; },
      [](const Args& a, const Tensor& up) { return Args{maxpool2d_backward(maxpool2d(a[0]), up)}; },
      {0}, rng, tol, corrupt);
}

GradCheckReport check_upsample(std::uint64_t seed, double tol, bool corrupt) {
  Rng rng(seed);
  Args args{random_tensor({pick(rng, 1, 3), pick(rng, 1, 5), pick(rng, 1, 5)}, rng)};
  return check_layer(
      "nearest_upsample2d", args, [](const Args& a) { return nearest_upsample2d(a[0]); },
      [](const Args&, const Tensor& up) { return Args{nearest_upsample2d_backward(up)}; }, {0},
      rng, tol, corrupt);
}

GradCheckReport check_relu(std::uint64_t seed, double tol, bool corrupt) {
  Rng rng(seed);
  Args args{random_away_from_zero({pick(rng, 1, 30)}, rng)};
  return check_layer(
      "relu", args, [](const Args& a) { return relu(a[0]); },
      [](const Args& a, const Tensor& up) { return Args{relu_backward(a[0], up)}; }, {0}, rng,
      tol, corrupt);
}

GradCheckReport check_leaky_relu(std::uint64_t seed, double tol, bool corrupt) {
  Rng rng(seed);
  const double alpha = uniform(rng, 0.01, 0.5);
  Args args{random_away_from_zero({pick(rng, 1, 30)}, rng)};
  return check_layer(
      "leaky_relu", args, [=](const Args& a) { return leaky_relu(a[0], alpha); },
      [=](const Args& a, const Tensor& up) { return Args{leaky_relu_backward(a[0], alpha, up)}; },
      {0}, rng, tol, corrupt);
}

GradCheckReport check_sigmoid(std::uint64_t seed, double tol, bool corrupt) {
  Rng rng(seed);
  Args args{random_tensor({pick(rng, 1, 30)}, rng, -4.0, 4.0)};
  return check_layer(
      "sigmoid", args, [](const Args& a) { return sigmoid(a[0]); },
      [](const Args& a, const Tensor& up) { return Args{sigmoid_backward(sigmoid(a[0]), up)}; },
      {0}, rng, tol, corrupt);
}

GradCheckReport check_loss(std::uint64_t seed, double tol, bool corrupt) {
  Rng rng(seed);
  const std::size_t n = pick(rng, 1, 30);
  const Tensor target = random_tensor({n}, rng);
  Tensor weight = random_tensor({n}, rng, 0.0, 6.0);
  weight[0] += 1.0;
  const Tensor pred = random_tensor({n}, rng);
  auto f = [&](const Tensor& p) { return weighted_mse_loss(p, target, weight).loss; };
  auto g = [&](const Tensor& p) {
    Tensor t = weighted_mse_loss(p, target, weight).grad;
    if (corrupt) t *= 2.0;
    return t;
  };
  return grad_check("weighted_mse_loss", f, g, pred, tol);
}

}  // namespace

const std::vector<LayerGradCheck>& registered_grad_checks() {
  static const std::vector<LayerGradCheck> checks = {
      {"conv1d", check_conv1d},
      {"conv2d", check_conv2d},
      {"partial_conv2d", check_partial_conv2d},
      {"dense", check_dense},
      {"maxpool2d", check_maxpool},
      {"nearest_upsample2d", check_upsample},
      {"relu", check_relu},
      {"leaky_relu", check_leaky_relu},
      {"sigmoid", check_sigmoid},
      {"weighted_mse_loss", check_loss},
  };
  return checks;
}

std::vector<GradCheckReport> run_grad_checks(std::size_t points, std::uint64_t seed,
                                             double tolerance, bool corrupt) {
  std::vector<GradCheckReport> out;
  for (const auto& check : registered_grad_checks()) {
    GradCheckReport agg{check.op, 0.0, tolerance, true};
    for (std::size_t p = 0; p < points; ++p) {
      const auto r = check.run(derive_seed(seed, check.op, {p}), tolerance, corrupt);
      agg.max_rel_error = std::max(agg.max_rel_error, r.max_rel_error);
    }
    agg.pass = agg.max_rel_error <= tolerance;
    out.push_back(agg);
  }
  return out;
}

}  // namespace gridfill
