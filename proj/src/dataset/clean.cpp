#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gridfill/dataset.hpp"
#include "gridfill/error.hpp"

namespace gridfill {

namespace {

// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

MeterRecord clean(MeterRecord record, const CleanRules& rules) {
  auto& valid = record.valid;
  const auto& x = record.values;
  const std::size_t n = record.size();

  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i] && (!std::isfinite(x[i]) || x[i] < 0.0)) valid[i] = 0;
  }

  // Constant runs over consecutive valid cells.
  std::size_t i = 0;
  while (i < n) {
    if (!valid[i]) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && valid[j] && x[j] == x[i]) ++j;
    const std::size_t limit = x[i] == 0.0 ? rules.zero_streak : rules.nonzero_streak;
    if (limit > 0 && j - i >= limit) std::fill(valid.begin() + i, valid.begin() + j, 0);
    i = j;
  }

  std::vector<double> kept;
  kept.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    if (valid[k]) kept.push_back(x[k]);
  if (kept.size() >= 4) {
    std::sort(kept.begin(), kept.end());
    const double median = quantile(kept, 0.5);
    const double iqr = quantile(kept, 0.75) - quantile(kept, 0.25);
    if (iqr > 0.0) {
      const double bound = rules.spike_iqr_factor * iqr;
      for (std::size_t k = 0; k < n; ++k)
        if (valid[k] && std::abs(x[k] - median) > bound) valid[k] = 0;
    }
  }
  return record;
}

bool modeling_year_offset(const MeterRecord& record, std::size_t& offset) {
  for (std::size_t o = 0; o < record.size() && o < kHoursPerWeek; ++o) {
    const HourStamp t = record.start + static_cast<HourStamp>(o);
    const HourStamp hour_of_day = ((t % 24) + 24) % 24;
    if (weekday(t) == 0 && hour_of_day == 0) {
      if (record.size() - o < kYearHours) return false;
      offset = o;
      return true;
    }
  }
  return false;
}

MeterRecord slice_modeling_year(const MeterRecord& record) {
  std::size_t offset = 0;
  if (!modeling_year_offset(record, offset)) {
    throw ValidationError("meter " + record.meter_id + ": no " + std::to_string(kYearHours) +
                          "-hour window starting on a Monday 00:00 (record has " +
                          std::to_string(record.size()) + " hours)");
  }
  MeterRecord out;
  out.meter_id = record.meter_id;
  out.site_id = record.site_id;
  out.type = record.type;
  out.start = record.start + static_cast<HourStamp>(offset);
  out.values.assign(record.values.begin() + offset, record.values.begin() + offset + kYearHours);
  out.valid.assign(record.valid.begin() + offset, record.valid.begin() + offset + kYearHours);
  return out;
}

FilterResult filter_low_missing(std::vector<MeterRecord> records, double threshold) {
  FilterResult result;
  for (auto& r : records) {
    std::size_t offset = 0;
    if (!modeling_year_offset(r, offset)) {
      result.excluded.push_back({r.meter_id, "no full Monday-aligned modeling year"});
      continue;
    }
    std::size_t invalid = 0;
    for (std::size_t i = offset; i < offset + kYearHours; ++i) invalid += r.valid[i] ? 0 : 1;
    const double frac = static_cast<double>(invalid) / static_cast<double>(kYearHours);
    if (frac < threshold) {
      result.kept.push_back(std::move(r));
    } else {
      char buf[96];
      std::snprintf(buf, sizeof buf, "invalid fraction %.4f >= %.4f", frac, threshold);
      result.excluded.push_back({r.meter_id, buf});
    }
  }
  return result;
}

}  // namespace gridfill
