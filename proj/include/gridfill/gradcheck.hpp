#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gridfill/tensor.hpp"

namespace gridfill {

struct GradCheckReport {
  std::string op;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

using ScalarFn = std::function<double(const Tensor&)>;
using GradFn = std::function<Tensor(const Tensor&)>;

/// Central differences, one coordinate at a time.
Tensor numeric_gradient(const ScalarFn& f, const Tensor& point, double step = 1e-5);

/// Componentwise |a - n| / max(|a|, |n|, floor) where floor = 1e-3 * max|a|
/// (and at least 1e-12). The floor keeps coordinates whose true gradient is
/// negligible relative to the rest from dominating through rounding noise.
double max_relative_error(const Tensor& analytic, const Tensor& numeric);

/// Compares grad(point) against central differences of f at `point`.
GradCheckReport grad_check(std::string op, const ScalarFn& f, const GradFn& grad,
                           const Tensor& point, double tolerance, double step = 1e-5);

/// One registered layer check. `run` draws a random point from `seed`,
/// checks every differentiable argument and returns the worst report.
/// `corrupt` doubles the analytic gradient (used to prove checks can fail).
struct LayerGradCheck {
  std::string op;
  std::function<GradCheckReport(std::uint64_t seed, double tolerance, bool corrupt)> run;
};

/// conv1d, conv2d, partial_conv2d, dense, maxpool2d, nearest_upsample2d,
/// relu, leaky_relu, sigmoid, weighted_mse_loss.
const std::vector<LayerGradCheck>& registered_grad_checks();

/// Runs every registered check at `points` random points; one aggregated
/// report per op (worst error over points).
std::vector<GradCheckReport> run_grad_checks(std::size_t points, std::uint64_t seed,
                                             double tolerance, bool corrupt = false);

}  // namespace gridfill
