#pragma once

#include <cstdint>
#include <vector>

#include "thor/core.hpp"

namespace thor {

// Adjacent-class pair; rows index into the dataset the pair was drawn from.
struct PairSample {
  Eigen::Index lower_row = 0;
  Eigen::Index upper_row = 0;
  RankLabel lower_class;

  RankLabel upper_class() const { return RankLabel(lower_class.value + 1); }
  auto lower_features(const OrdinalDataset& ds) const { return ds.row(lower_row); }
  auto upper_features(const OrdinalDataset& ds) const { return ds.row(upper_row); }
};

// One epoch of pairs. For each adjacent class pair (i, i+1), max(n_i, n_{i+1})
// pairs: the larger class is walked as a shuffled permutation, the smaller
// one as reshuffled permutations repeated until enough draws exist, so every
// example appears at least once. The pairs are then shuffled globally.
// Throws UncoverableClass if any class is empty.
std::vector<PairSample> epoch_pairs(const OrdinalDataset& ds, std::uint64_t seed);

}  // namespace thor
