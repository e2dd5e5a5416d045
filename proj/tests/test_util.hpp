#pragma once

#include <vector>

#include "thor/core.hpp"

namespace thor::testing {

// Dataset whose single feature equals the row index, so rows stay
// identifiable after shuffling and splitting.
inline OrdinalDataset indexed_dataset(const std::vector<int>& per_class) {
  std::vector<RankLabel> labels;
  for (size_t c = 0; c < per_class.size(); ++c) {
    for (int n = 0; n < per_class[c]; ++n) labels.emplace_back(static_cast<int>(c) + 1);
  }
  Eigen::MatrixXd f(static_cast<Eigen::Index>(labels.size()), 1);
  for (Eigen::Index r = 0; r < f.rows(); ++r) f(r, 0) = static_cast<double>(r);
  return OrdinalDataset(f, labels, static_cast<int>(per_class.size()));
}

}  // namespace thor::testing
