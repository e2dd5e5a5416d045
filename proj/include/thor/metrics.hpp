#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thor/core.hpp"

namespace thor {

struct MetricsReport {
  double accuracy = 0.0;
  double mae = 0.0;
  Eigen::Index n = 0;
  std::optional<double> inconsistency_rate;  // binary-decomposition methods only
};

// Fraction of exact matches. Throws InvalidArgument on empty input,
// ShapeError on a length mismatch.
double accuracy(std::span<const RankLabel> preds, std::span<const RankLabel> labels);
// Mean |pred - label|.
double mae(std::span<const RankLabel> preds, std::span<const RankLabel> labels);

struct InconsistencyCount {
  Eigen::Index count = 0;
  double rate = 0.0;
};

// Vectors holding a 1 after a 0. All vectors must share one length.
InconsistencyCount inconsistency_count(const std::vector<std::vector<int>>& decisions);

// `n=... accuracy=... mae=... [inconsistency_rate=...]`
std::string format_metrics(const MetricsReport& r);

}  // namespace thor
