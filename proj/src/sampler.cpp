#include "thor/sampler.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace thor {

namespace {

std::vector<Eigen::Index> draw(const std::vector<Eigen::Index>& pool, size_t n, std::mt19937_64& rng) {
  std::vector<Eigen::Index> out;
  out.reserve(n);
  std::vector<Eigen::Index> perm = pool;
  while (out.size() < n) {
    std::shuffle(perm.begin(), perm.end(), rng);
    const size_t take = std::min(perm.size(), n - out.size());
    out.insert(out.end(), perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

}  // namespace

std::vector<PairSample> epoch_pairs(const OrdinalDataset& ds, std::uint64_t seed) {
  const auto by_class = ds.indices_by_class();
  for (size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].empty()) {
      const int label = static_cast<int>(c) + 1;
      throw UncoverableClass("class " + std::to_string(label) + " has no examples; cannot form adjacent pairs",
                             label);
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<PairSample> pairs;
  for (int i = 1; i < ds.k(); ++i) {
    const auto& lower = by_class[static_cast<size_t>(i - 1)];
    const auto& upper = by_class[static_cast<size_t>(i)];
    const size_t n = std::max(lower.size(), upper.size());
    const auto lo = draw(lower, n, rng);
    const auto up = draw(upper, n, rng);
    for (size_t p = 0; p < n; ++p) pairs.push_back({lo[p], up[p], RankLabel(i)});
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  return pairs;
}

}  // namespace thor
