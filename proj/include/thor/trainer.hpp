#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "thor/core.hpp"
#include "thor/losses.hpp"
#include "thor/metrics.hpp"
#include "thor/net.hpp"

namespace thor {

// Which output a two-headed model (cnnpor, hybrid) is read through.
enum class InferenceHead { kDefault, kClassification, kRegression };

std::string_view head_name(InferenceHead h);
InferenceHead parse_head(std::string_view name);

// A trained model together with everything needed to turn its outputs into
// ranks. Output layout per method:
//   thor          [score]
//   orcnn         [logit_1 .. logit_{K-1}]
//   coral         [shared logit], biases in `coral`
//   cnnpor/hybrid [class logit_1 .. class logit_K, regression score]
struct Predictor {
  Method method;
  Boundaries boundaries;
  DenseModel model;
  CoralHead coral;

  int k() const { return boundaries.k(); }
};

int output_width(Method m, int k);

struct Predictions {
  std::vector<RankLabel> ranks;
  std::vector<std::vector<int>> decisions;  // orcnn/coral only
};

// Applies the method's inference rule to every row. The margin is ignored.
// hybrid requires an explicit head; cnnpor only supports classification.
Predictions predict_ranks(const Predictor& p, const OrdinalDataset& ds, InferenceHead head = InferenceHead::kDefault);
MetricsReport evaluate(const Predictor& p, const OrdinalDataset& ds, InferenceHead head = InferenceHead::kDefault);

enum class SelectOn { kMae, kAccuracy };

struct TrainConfig {
  Method method = Method::kThor;
  int epochs = 100;
  int batch_size = 32;
  double lr = 0.01;
  double gamma = 0.5;
  std::uint64_t seed = 42;
  std::optional<std::vector<double>> thresholds;  // default: b_i = i - 1
  std::vector<int> hidden = {64, 32};
  Activation activation = Activation::kRelu;
  SelectOn select_on = SelectOn::kMae;
  CnnporConfig cnnpor;
  double hybrid_c = 1.0;
  InferenceHead hybrid_head = InferenceHead::kRegression;  // used for validation
  bool allow_infeasible_margin = false;
  std::filesystem::path out_dir;  // empty: nothing is written

  void validate() const;
  Boundaries boundaries(int k) const;
};

struct EpochRecord {
  double train_loss = 0.0;
  double val_mae = 0.0;
  double val_acc = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 1-based
  std::filesystem::path best_checkpoint;
  Predictor best;
};

// Batched SGD over adjacent-class pairs with per-epoch validation and
// best-model selection. Pointwise methods (orcnn, coral) take the sum of
// their per-example losses over both members of each pair.
TrainReport train(const OrdinalDataset& train_set, const OrdinalDataset& val_set, const TrainConfig& cfg);

// Mean loss over the given pairs without updating anything.
double pair_batch_loss(const Predictor& p, const OrdinalDataset& ds, std::span<const struct PairSample> pairs,
                       const TrainConfig& cfg);

void save_predictor(const std::filesystem::path& path, const Predictor& p);
Predictor load_predictor(const std::filesystem::path& path);
void write_report(const std::filesystem::path& path, const TrainReport& r);

}  // namespace thor
