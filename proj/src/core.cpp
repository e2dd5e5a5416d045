#include "thor/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace thor {

void check_class_count(int k) {
  if (k < 2) throw InvalidArgument("invalid class count " + std::to_string(k) + ": need k >= 2");
}

void check_label(RankLabel y, int k) {
  if (y.value < 1 || y.value > k) {
    throw InvalidArgument("invalid label " + std::to_string(y.value) + ": expected 1.." +
                          std::to_string(k));
  }
}

Boundaries::Boundaries(std::vector<double> thresholds, double margin)
    : thresholds_(std::move(thresholds)), margin_(margin) {
  if (thresholds_.size() < 3) {
    throw InvalidArgument("boundaries need at least 3 thresholds (k >= 2), got " +
                          std::to_string(thresholds_.size()));
  }
  for (size_t i = 0; i < thresholds_.size(); ++i) {
    if (!std::isfinite(thresholds_[i])) throw InvalidArgument("non-finite threshold");
    if (i > 0 && !(thresholds_[i - 1] < thresholds_[i])) {
      throw InvalidArgument("thresholds must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
  if (!std::isfinite(margin_) || margin_ < 0.0) {
    throw InvalidArgument("margin must be finite and >= 0");
  }
}

double Boundaries::min_width() const {
  double w = thresholds_[1] - thresholds_[0];
  for (size_t i = 2; i < thresholds_.size(); ++i) w = std::min(w, thresholds_[i] - thresholds_[i - 1]);
  return w;
}

void Boundaries::require_feasible_margin() const {
  if (!margin_feasible()) {
    throw InfeasibleMargin("margin " + std::to_string(margin_) +
                           " exceeds half the narrowest segment width " + std::to_string(min_width()));
  }
}

Boundaries default_boundaries(int k) {
  check_class_count(k);
  std::vector<double> t(static_cast<size_t>(k) + 1);
  for (int i = 0; i <= k; ++i) t[static_cast<size_t>(i)] = static_cast<double>(i - 1);
  return Boundaries(std::move(t), 0.5);
}

RankLabel infer_rank_threshold(double score, const Boundaries& b) {
  const auto& t = b.thresholds();
  // First threshold >= score among b_1..b_{K-1}; its index is the class.
  auto it = std::lower_bound(t.begin() + 1, t.end() - 1, score);
  return RankLabel(static_cast<int>(it - t.begin()));
}

ExtendedBinaryLabel::ExtendedBinaryLabel(std::vector<int> bits) : bits_(std::move(bits)) {
  for (size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] != 0 && bits_[i] != 1) throw InvalidArgument("extended binary bits must be 0 or 1");
  }
  if (!is_monotone_decision(bits_)) {
    throw InvalidArgument("extended binary label must be monotone non-increasing");
  }
}

ExtendedBinaryLabel encode_extended_binary(RankLabel y, int k) {
  check_class_count(k);
  check_label(y, k);
  std::vector<int> bits(static_cast<size_t>(k - 1), 0);
  std::fill_n(bits.begin(), y.value - 1, 1);
  return ExtendedBinaryLabel(std::move(bits));
}

RankLabel infer_rank_binary(std::span<const int> decisions) {
  int ones = 0;
  for (int d : decisions) ones += (d != 0);
  return RankLabel(ones + 1);
}

bool is_monotone_decision(std::span<const int> decisions) {
  for (size_t i = 1; i < decisions.size(); ++i) {
    if (decisions[i] != 0 && decisions[i - 1] == 0) return false;
  }
  return true;
}

OrdinalDataset::OrdinalDataset(Eigen::MatrixXd features, std::vector<RankLabel> labels, int k)
    : features_(std::move(features)), labels_(std::move(labels)), k_(k) {
  check_class_count(k_);
  if (static_cast<size_t>(features_.rows()) != labels_.size()) {
    throw ShapeError("feature rows (" + std::to_string(features_.rows()) + ") != labels (" +
                     std::to_string(labels_.size()) + ")");
  }
  if (features_.cols() < 1) throw ShapeError("feature dimension must be >= 1");
  for (RankLabel y : labels_) check_label(y, k_);
}

std::vector<std::vector<Eigen::Index>> OrdinalDataset::indices_by_class() const {
  std::vector<std::vector<Eigen::Index>> out(static_cast<size_t>(k_));
  for (Eigen::Index i = 0; i < size(); ++i) out[static_cast<size_t>(label(i).value - 1)].push_back(i);
  return out;
}

OrdinalDataset OrdinalDataset::subset(std::span<const Eigen::Index> rows) const {
  Eigen::MatrixXd f(static_cast<Eigen::Index>(rows.size()), dim());
  std::vector<RankLabel> l;
  l.reserve(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    f.row(static_cast<Eigen::Index>(r)) = features_.row(rows[r]);
    l.push_back(label(rows[r]));
  }
  return OrdinalDataset(std::move(f), std::move(l), k_);
}

}  // namespace thor
