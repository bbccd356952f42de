#include <algorithm>
#include <array>
#include <set>

#include "gridfill/dataset.hpp"
#include "gridfill/error.hpp"
#include "gridfill/rng.hpp"

namespace gridfill {

FoldAssignment assign_folds(const std::vector<EnergyImage>& images, std::uint64_t seed) {
  std::map<std::string, std::size_t> counts;
  for (const auto& img : images) ++counts[img.site_id];
  if (counts.size() < kFoldCount) {
    throw ValidationError("site split needs at least " + std::to_string(kFoldCount) +
                          " distinct sites, got " + std::to_string(counts.size()));
  }
  std::vector<std::pair<std::string, std::size_t>> sites(counts.begin(), counts.end());
  Rng rng(derive_seed(seed, "split.sites"));
  shuffle(sites.begin(), sites.end(), rng);
  std::stable_sort(sites.begin(), sites.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  FoldAssignment folds;
  std::array<std::size_t, kFoldCount> load{};
  for (const auto& [site, n] : sites) {
    const auto lightest = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    load[lightest] += n;
    folds.site_fold[site] = lightest;
  }
  return folds;
}

SplitRound split_round(const std::vector<EnergyImage>& images, const FoldAssignment& folds,
                       std::size_t round) {
  SplitRound split;
  for (std::size_t i = 0; i < images.size(); ++i) {
    auto it = folds.site_fold.find(images[i].site_id);
    if (it == folds.site_fold.end()) {
      throw ValidationError("site " + images[i].site_id + " has no fold assignment");
    }
    const std::size_t pos = (it->second + kFoldCount - round % kFoldCount) % kFoldCount;
    if (pos < 3) {
      split.train.push_back(i);
    } else if (pos == 3) {
      split.val.push_back(i);
    } else {
      split.test.push_back(i);
    }
  }
  return split;
}

bool sites_disjoint(const std::vector<EnergyImage>& images, const SplitRound& split) {
  auto sites = [&](const std::vector<std::size_t>& idx) {
    std::set<std::string> s;
    for (auto i : idx) s.insert(images[i].site_id);
    return s;
  };
  const auto a = sites(split.train), b = sites(split.val), c = sites(split.test);
  auto overlap = [](const std::set<std::string>& x, const std::set<std::string>& y) {
    return std::any_of(x.begin(), x.end(), [&](const auto& s) { return y.count(s) != 0; });
  };
  return !overlap(a, b) && !overlap(a, c) && !overlap(b, c);
}

}  // namespace gridfill
