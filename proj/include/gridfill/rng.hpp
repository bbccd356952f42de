#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace gridfill {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
/// 64-bit FNV-1a.
std::uint64_t hash_string(std::string_view s);

/// Seed for a named purpose, e.g. derive_seed(seed, "train.mask", {epoch, item}).
/// All randomness in the toolkit flows from one user seed through this.
std::uint64_t derive_seed(std::uint64_t base, std::string_view purpose,
                          std::initializer_list<std::uint64_t> parts = {});

// Distribution helpers with fixed algorithms, so sequences do not depend on
// the standard library's distribution implementations.
double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);
/// Uniform integer in [0, n); n > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);
/// Uniform integer in [lo, hi].
long uniform_int(Rng& rng, long lo, long hi);
double standard_normal(Rng& rng);

template <class It>
void shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1), first + static_cast<std::ptrdiff_t>(j));
  }
}

}  // namespace gridfill
