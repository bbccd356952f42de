#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gridfill/dataset.hpp"

namespace gridfill {

/// Parameters of a synthetic fleet. Arrays are indexed by MeterType
/// (electricity, chilledwater, steam, hotwater).
struct SynthSpec {
  std::size_t sites = 10;
  std::size_t meters_per_site = 20;
  std::array<double, 4> type_mix = {0.4, 0.2, 0.2, 0.2};
  // Strength of the temperature response; 0 gives a purely weekly profile.
  std::array<double, 4> weather_amplitude = {0.05, 1.0, 1.0, 1.0};
  double noise_sigma = 0.02;  // multiplicative noise
  std::uint64_t seed = 0;
  HourStamp start = 16804 * 24;  // 2016-01-04 00:00 UTC, a Monday
  std::size_t hours = kYearHours;

  /// Throws ValidationError on empty fleets, negative weights or sigma.
  void validate() const;
};

/// Hourly outdoor temperature (deg C) for one site: annual sinusoid, a
/// diurnal swing and day-to-day AR(1) weather noise.
std::vector<double> site_temperature(std::uint64_t seed, std::size_t site, HourStamp start,
                                     std::size_t hours);

/// Strictly positive, fully valid meter series. Types are laid out within a
/// site by the cumulative type mix; meter ids are "siteSS_mMMM".
std::vector<MeterRecord> generate_fleet(const SynthSpec& spec);

}  // namespace gridfill
