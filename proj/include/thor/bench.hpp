#pragma once

#include <string>
#include <vector>

#include "thor/data.hpp"
#include "thor/trainer.hpp"

namespace thor {

struct ComparisonRow {
  std::string label;  // method name, or hybrid-<head> for each hybrid head
  Method method;
  MetricsReport metrics;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
};

// Trains every method on the same splits and config (method swapped in),
// evaluates on the test split. hybrid contributes one row per inference
// head. When cfg.out_dir is set, each run writes under out_dir/<method>.
// Up to `jobs` runs execute concurrently; row order follows `methods`.
ComparisonTable compare(const std::vector<Method>& methods, const DatasetSplits& splits, const TrainConfig& cfg,
                        int jobs = 1);

// `method,accuracy,mae,inconsistency_rate`; the rate is empty when not
// applicable.
std::string comparison_csv(const ComparisonTable& t);
// Aligned table; `*` marks the best value of a column, `+` the second best.
std::string comparison_text(const ComparisonTable& t);

struct SweepPoint {
  double gamma = 0.0;
  double accuracy = 0.0;
  double mae = 0.0;
};

// One THOR run per margin, everything else fixed, evaluated on the test
// split. Margins above half the narrowest segment are rejected with
// InfeasibleMargin unless allow_infeasible is set.
std::vector<SweepPoint> sweep_gamma(const std::vector<double>& gammas, const DatasetSplits& splits,
                                    const TrainConfig& cfg, bool allow_infeasible = false, int jobs = 1);

// `gamma,accuracy,mae`
std::string sweep_csv(const std::vector<SweepPoint>& s);

}  // namespace thor
