#include "gridfill/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "gridfill/error.hpp"
#include "gridfill/parallel.hpp"
#include "gridfill/rng.hpp"

namespace gridfill {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

MeterType type_for(const std::array<double, 4>& mix, std::size_t j, std::size_t n) {
  double total = 0.0;
  for (double w : mix) total += w;
  const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(n) * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < mix.size(); ++k) {
    acc += mix[k];
    if (u < acc) return static_cast<MeterType>(k);
  }
  return static_cast<MeterType>(mix.size() - 1);
}

// Smooth hinge: ~max(0, x) with a rounded knee of width `s`.
double softplus(double x, double s) { return s * std::log1p(std::exp(x / s)); }

}  // namespace

void SynthSpec::validate() const {
  if (sites == 0) throw ValidationError("synth: sites must be at least 1");
  if (meters_per_site == 0) throw ValidationError("synth: meters per site must be at least 1");
  double total = 0.0;
  for (double w : type_mix) {
    if (!(w >= 0.0)) throw ValidationError("synth: type mix weights must be non-negative");
    total += w;
  }
  if (total <= 0.0) throw ValidationError("synth: type mix is all zero");
  for (double a : weather_amplitude)
    if (!(a >= 0.0)) throw ValidationError("synth: weather amplitudes must be non-negative");
  if (!(noise_sigma >= 0.0 && noise_sigma < 0.25))
    throw ValidationError("synth: noise sigma must lie in [0, 0.25)");
  if (hours == 0) throw ValidationError("synth: hours must be positive");
}

std::vector<double> site_temperature(std::uint64_t seed, std::size_t site, HourStamp start,
                                     std::size_t hours) {
  Rng rng(derive_seed(seed, "synth.temperature", {site}));
  const double mean = uniform(rng, 10.0, 16.0);
  const double annual = uniform(rng, 8.0, 13.0);
  const double diurnal = uniform(rng, 3.0, 6.0);
  const std::size_t days = hours / kHoursPerDay + 2;
  std::vector<double> daily(days);
  double state = 0.0;
  for (auto& d : daily) {
    state = 0.8 * state + 2.5 * standard_normal(rng);
    d = state;
  }
  std::vector<double> temp(hours);
  for (std::size_t t = 0; t < hours; ++t) {
    const double abs_hour = static_cast<double>(start + static_cast<HourStamp>(t));
    const double doy = std::fmod(abs_hour / 24.0, 365.25);
    const double hod = std::fmod(abs_hour, 24.0);
    // Daily anomaly interpolated between day midpoints.
    const double pos = static_cast<double>(t) / 24.0;
    const auto d0 = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(d0);
    const double anomaly = daily[d0] * (1.0 - f) + daily[d0 + 1] * f;
    temp[t] = mean - annual * std::cos(kTwoPi * (doy - 20.0) / 365.25) -
              diurnal * std::cos(kTwoPi * (hod - 3.0) / 24.0) + anomaly;
  }
  return temp;
}

std::vector<MeterRecord> generate_fleet(const SynthSpec& spec) {
  spec.validate();
  std::vector<std::vector<double>> temps(spec.sites);
  for (std::size_t s = 0; s < spec.sites; ++s)
    temps[s] = site_temperature(spec.seed, s, spec.start, spec.hours);

  std::vector<MeterRecord> fleet(spec.sites * spec.meters_per_site);
  parallel_for(fleet.size(), [&](std::size_t idx) {
    const std::size_t s = idx / spec.meters_per_site;
    const std::size_t j = idx % spec.meters_per_site;
    Rng rng(derive_seed(spec.seed, "synth.meter", {s, j}));
    char id[32];
    char site[16];
    std::snprintf(site, sizeof site, "site%02zu", s);
    std::snprintf(id, sizeof id, "site%02zu_m%03zu", s, j);

    MeterRecord rec;
    rec.meter_id = id;
    rec.site_id = site;
    rec.type = type_for(spec.type_mix, j, spec.meters_per_site);
    rec.start = spec.start;
    rec.values.resize(spec.hours);
    rec.valid.assign(spec.hours, 1);

    const double base = uniform(rng, 20.0, 200.0);
    const double occupied_gain = uniform(rng, 0.4, 1.2);
    const double weekend_level = uniform(rng, 0.1, 0.6);
    const double open = static_cast<double>(uniform_int(rng, 6, 9));
    const double close = static_cast<double>(uniform_int(rng, 16, 20));
    const double night_wave = uniform(rng, 0.02, 0.12);
    const double balance = uniform(rng, 14.0, 18.0);  // balance-point temperature
    const double amp = spec.weather_amplitude[static_cast<std::size_t>(rec.type)];
    const auto& temp = temps[s];

    for (std::size_t t = 0; t < spec.hours; ++t) {
      const HourStamp abs_hour = spec.start + static_cast<HourStamp>(t);
      const double hod = static_cast<double>(abs_hour % 24);
      const bool weekend = weekday(abs_hour) >= 5;
      // Occupancy ramps over one hour at both ends of the working day.
      const double ramp_up = std::clamp(hod - open + 1.0, 0.0, 1.0);
      const double ramp_down = std::clamp(close - hod, 0.0, 1.0);
      const double occ = std::min(ramp_up, ramp_down) * (weekend ? weekend_level : 1.0);
      double load = 0.5 + occupied_gain * occ + night_wave * std::sin(kTwoPi * (hod - 6.0) / 24.0);

      double weather = 0.0;
      switch (rec.type) {
        case MeterType::electricity: weather = softplus(temp[t] - 22.0, 2.0) / 10.0; break;
        case MeterType::chilledwater: weather = softplus(temp[t] - balance, 2.0) / 6.0; break;
        case MeterType::steam:
        case MeterType::hotwater: weather = softplus(balance - temp[t], 2.0) / 6.0; break;
      }
      load *= 1.0 + amp * weather;
      if (rec.type != MeterType::electricity) load += amp * weather;

      const double eps = std::clamp(standard_normal(rng), -4.0, 4.0);
      rec.values[t] = base * load * (1.0 + spec.noise_sigma * eps);
    }
    fleet[idx] = std::move(rec);
  });
  return fleet;
}

}  // namespace gridfill
