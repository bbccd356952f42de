#include <algorithm>
#include <cmath>
#include <limits>

#include "gridfill/dataset.hpp"
#include "gridfill/error.hpp"

namespace gridfill {

// Normalized values are snapped to multiples of 2^-52. On that lattice
// 1 - x is exact, so the vertical flip used for augmentation is an exact
// involution; the snap moves values by at most 1.2e-16.
double NormParams::normalize(double x) const {
  if (!(x_max > x_min)) return 0.0;
  constexpr double kLattice = 0x1.0p52;
  return std::round((x - x_min) / (x_max - x_min) * kLattice) / kLattice;
}

double NormParams::denormalize(double x) const {
  return x_max > x_min ? x * (x_max - x_min) + x_min : x_min;
}

Normalized normalize(std::span<const double> values, std::span<const std::uint8_t> valid) {
  if (values.size() != valid.size()) {
    throw ShapeError("normalize: " + std::to_string(values.size()) + " values vs " +
                     std::to_string(valid.size()) + " validity flags");
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!valid[i]) continue;
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  if (lo > hi) throw ValidationError("normalize: no valid cells");
  Normalized out{std::vector<double>(values.size(), 0.0), {lo, hi}};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (valid[i]) out.values[i] = out.params.normalize(values[i]);
  }
  return out;
}

Tensor reshape_to_grid(std::span<const double> series) {
  if (series.size() != kYearHours) {
    throw ValidationError("reshape_to_grid: need " + std::to_string(kYearHours) + " hours, got " +
                          std::to_string(series.size()));
  }
  Tensor grid({kHoursPerWeek, kWeeks});
  for (std::size_t t = 0; t < kYearHours; ++t) grid[grid_index(t)] = series[t];
  return grid;
}

std::vector<double> flatten_grid(const Tensor& grid) {
  if (grid.shape() != Shape{kHoursPerWeek, kWeeks}) {
    throw ShapeError("flatten_grid: expected (168,52), got " + shape_str(grid.shape()));
  }
  std::vector<double> series(kYearHours);
  for (std::size_t t = 0; t < kYearHours; ++t) series[t] = grid[grid_index(t)];
  return series;
}

EnergyImage make_image(const MeterRecord& record) {
  const MeterRecord year = slice_modeling_year(record);
  const auto norm = normalize(year.values, year.valid);
  EnergyImage img;
  img.meter_id = year.meter_id;
  img.site_id = year.site_id;
  img.type = year.type;
  img.matrix = reshape_to_grid(norm.values);
  std::vector<double> valid(year.valid.begin(), year.valid.end());
  img.validity = reshape_to_grid(valid);
  img.norm = norm.params;
  img.week0_start = year.start;
  return img;
}

}  // namespace gridfill
