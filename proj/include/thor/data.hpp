#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "thor/core.hpp"

namespace thor {

struct SyntheticSpec {
  int k = 5;
  int per_class = 200;
  int d = 8;
  double noise = 0.5;        // std-dev of the latent around its class centre
  std::uint64_t transform_seed = 42;
  double label_noise = 0.0;  // probability of a +-1 label flip

  void validate() const;
};

// Latent score ~ Normal(i - 1.5, noise) for class i (the centres of the
// default unit segments), embedded with distractor N(0,1) coordinates
// through a fixed random orthogonal matrix. Rows are grouped by true class.
// When `latents` is given it receives the latent score of every row.
OrdinalDataset generate_synthetic(const SyntheticSpec& spec, std::vector<double>* latents = nullptr);

// Rows `f1,...,fd,label`. Blank lines are skipped; line numbers in errors
// are 1-based physical lines.
OrdinalDataset load_csv(const std::filesystem::path& path, int k, bool has_header = false);
void write_csv(const std::filesystem::path& path, const OrdinalDataset& ds, bool header = true);

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

struct DatasetSplits {
  OrdinalDataset train;
  OrdinalDataset val;
  OrdinalDataset test;
};

// Per-class split sizes by largest-remainder rounding (ties go to the
// earlier split).
std::array<Eigen::Index, 3> split_sizes(Eigen::Index n, const SplitRatios& r);

// Stratified seeded split. Throws UncoverableClass if a class would have no
// training example.
DatasetSplits split(const OrdinalDataset& ds, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace thor
