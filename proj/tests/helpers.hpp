#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "gridfill/dataset.hpp"
#include "gridfill/rng.hpp"
#include "gridfill/tensor.hpp"

namespace testing_helpers {

using namespace gridfill;

inline Tensor random_tensor(Rng& rng, Shape shape, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = standard_normal(rng) * scale;
  return t;
}

// Binary tensor with roughly `keep` of its cells set to 1.
inline Tensor random_binary(Rng& rng, Shape shape, double keep) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = uniform01(rng) < keep ? 1.0 : 0.0;
  return t;
}

inline double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Synthetic meter-year image with a weekly shape plus noise; all cells valid.
inline EnergyImage synthetic_image(std::uint64_t seed, const std::string& id = "m0") {
  Rng rng(seed);
  EnergyImage img;
  img.meter_id = id;
  img.site_id = "s0";
  const double phase = uniform(rng, 0.0, 6.28);
  for (std::size_t t = 0; t < kYearHours; ++t) {
    const double day = std::sin(6.283185307179586 * static_cast<double>(t % 24) / 24.0 + phase);
    const double v = 0.5 + 0.3 * day + 0.05 * standard_normal(rng);
    img.matrix[grid_index(t)] = std::min(1.0, std::max(0.0, v));
  }
  img.validity.fill(1.0);
  img.norm = {0.0, 100.0};
  return img;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("gridfill_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace testing_helpers
