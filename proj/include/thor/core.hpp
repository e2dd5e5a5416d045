#pragma once

#include <compare>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "thor/error.hpp"

namespace thor {

// Integer rank in 1..K. The upper bound depends on the dataset, so range
// checks happen where K is known.
struct RankLabel {
  int value = 1;

  constexpr RankLabel() = default;
  constexpr explicit RankLabel(int v) : value(v) {}

  friend constexpr auto operator<=>(RankLabel, RankLabel) = default;
};

void check_class_count(int k);
void check_label(RankLabel y, int k);

// Fixed class boundaries b_0 < b_1 < ... < b_K and the training margin.
// Class i occupies the half-open segment (b_{i-1}, b_i].
class Boundaries {
 public:
  Boundaries(std::vector<double> thresholds, double margin);

  int k() const { return static_cast<int>(thresholds_.size()) - 1; }
  double margin() const { return margin_; }
  const std::vector<double>& thresholds() const { return thresholds_; }
  double operator[](int i) const { return thresholds_[static_cast<size_t>(i)]; }

  double lower(RankLabel y) const { return thresholds_[static_cast<size_t>(y.value - 1)]; }
  double upper(RankLabel y) const { return thresholds_[static_cast<size_t>(y.value)]; }
  double midpoint(RankLabel y) const { return 0.5 * (lower(y) + upper(y)); }
  double min_width() const;

  // True when every segment can hold the margin-shrunk interval.
  bool margin_feasible() const { return 2.0 * margin_ <= min_width(); }
  // Throws InfeasibleMargin unless margin_feasible().
  void require_feasible_margin() const;

  Boundaries with_margin(double margin) const { return Boundaries(thresholds_, margin); }

  friend bool operator==(const Boundaries&, const Boundaries&) = default;

 private:
  std::vector<double> thresholds_;
  double margin_;
};

// b_i = i - 1 for i = 0..k, margin 0.5.
Boundaries default_boundaries(int k);

// Maps a score to the class whose segment contains it. The margin is not
// used; scores outside [b_0, b_K] clamp to the end classes.
RankLabel infer_rank_threshold(double score, const Boundaries& b);

// K-1 bits, the first y-1 of which are set.
class ExtendedBinaryLabel {
 public:
  explicit ExtendedBinaryLabel(std::vector<int> bits);

  const std::vector<int>& bits() const { return bits_; }
  size_t size() const { return bits_.size(); }
  int operator[](size_t i) const { return bits_[i]; }

  friend bool operator==(const ExtendedBinaryLabel&, const ExtendedBinaryLabel&) = default;

 private:
  std::vector<int> bits_;
};

ExtendedBinaryLabel encode_extended_binary(RankLabel y, int k);

// Sum of positive decisions plus one. Accepts non-monotone vectors.
RankLabel infer_rank_binary(std::span<const int> decisions);

// True if the vector never has a 1 after a 0.
bool is_monotone_decision(std::span<const int> decisions);

class OrdinalDataset {
 public:
  OrdinalDataset(Eigen::MatrixXd features, std::vector<RankLabel> labels, int k);

  int k() const { return k_; }
  Eigen::Index size() const { return features_.rows(); }
  Eigen::Index dim() const { return features_.cols(); }

  const Eigen::MatrixXd& features() const { return features_; }
  const std::vector<RankLabel>& labels() const { return labels_; }

  auto row(Eigen::Index i) const { return features_.row(i); }
  RankLabel label(Eigen::Index i) const { return labels_[static_cast<size_t>(i)]; }

  // Row indices grouped by class; entry c holds the rows of class c+1.
  std::vector<std::vector<Eigen::Index>> indices_by_class() const;

  OrdinalDataset subset(std::span<const Eigen::Index> rows) const;

 private:
  Eigen::MatrixXd features_;
  std::vector<RankLabel> labels_;
  int k_;
};

}  // namespace thor
