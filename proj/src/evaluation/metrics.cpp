#include <algorithm>
#include <cmath>

#include "gridfill/error.hpp"
#include "gridfill/evaluation.hpp"

namespace gridfill {

double mse_masked(const Tensor& pred, const Tensor& truth, const Tensor& eval_mask) {
  require_same_shape(pred, truth, "mse_masked");
  require_same_shape(pred, eval_mask, "mse_masked");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (eval_mask[i] == 0.0) continue;
    const double d = pred[i] - truth[i];
    sum += d * d;
    ++n;
  }
  if (n == 0) throw ValidationError("mse_masked: evaluation mask selects no cells");
  return sum / static_cast<double>(n);
}

double r2_masked(const Tensor& pred, const Tensor& truth, const Tensor& eval_mask) {
  require_same_shape(pred, truth, "r2_masked");
  require_same_shape(pred, eval_mask, "r2_masked");
  double mean = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (eval_mask[i] == 0.0) continue;
    mean += truth[i];
    ++n;
  }
  if (n < 2) throw DegenerateMetricError("r2_masked: fewer than 2 evaluated cells");
  mean /= static_cast<double>(n);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (eval_mask[i] == 0.0) continue;
    const double r = truth[i] - pred[i];
    const double t = truth[i] - mean;
    ss_res += r * r;
    ss_tot += t * t;
  }
  if (ss_tot == 0.0) throw DegenerateMetricError("r2_masked: truth is constant on evaluated cells");
  return 1.0 - ss_res / ss_tot;
}

Summary summarize(std::vector<double> values) {
  if (values.empty()) throw ValidationError("summarize: no values");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  Summary s;
  s.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.median = quantile(0.5);
  s.q1 = quantile(0.25);
  s.q3 = quantile(0.75);
  return s;
}

}  // namespace gridfill
