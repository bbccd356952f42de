#include "gridfill/dataset.hpp"
#include "gridfill/rng.hpp"

namespace gridfill {

EnergyImage shift_image(const EnergyImage& image, std::size_t hours) {
  EnergyImage out = image;
  hours %= kYearHours;
  for (std::size_t t = 0; t < kYearHours; ++t) {
    const std::size_t src = grid_index((t + kYearHours - hours) % kYearHours);
    out.matrix[grid_index(t)] = image.matrix[src];
    out.validity[grid_index(t)] = image.validity[src];
  }
  return out;
}

EnergyImage flip_image(const EnergyImage& image) {
  EnergyImage out = image;
  for (std::size_t i = 0; i < out.matrix.size(); ++i) {
    if (out.validity[i] != 0.0) out.matrix[i] = 1.0 - out.matrix[i];
  }
  return out;
}

std::vector<EnergyImage> augment(const std::vector<EnergyImage>& images, std::uint64_t seed) {
  std::vector<EnergyImage> out;
  out.reserve(images.size() * 4);
  for (std::size_t i = 0; i < images.size(); ++i) {
    Rng rng(derive_seed(seed, "augment.shift", {i}));
    const auto hours = static_cast<std::size_t>(uniform_int(rng, 1, kHoursPerWeek - 1));
    EnergyImage shifted = shift_image(images[i], hours);
    out.push_back(images[i]);
    out.push_back(shifted);
    out.push_back(flip_image(images[i]));
    out.push_back(flip_image(shifted));
  }
  return out;
}

}  // namespace gridfill
