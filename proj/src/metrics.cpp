#include "thor/metrics.hpp"

#include <cstdio>
#include <cstdlib>

namespace thor {

namespace {

void check_pair(std::span<const RankLabel> preds, std::span<const RankLabel> labels) {
  if (preds.empty() || labels.empty()) throw InvalidArgument("metrics need a non-empty set");
  if (preds.size() != labels.size()) throw ShapeError("prediction and label counts differ");
}

}  // namespace

double accuracy(std::span<const RankLabel> preds, std::span<const RankLabel> labels) {
  check_pair(preds, labels);
  size_t hits = 0;
  for (size_t t = 0; t < preds.size(); ++t) hits += (preds[t] == labels[t]);
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double mae(std::span<const RankLabel> preds, std::span<const RankLabel> labels) {
  check_pair(preds, labels);
  // Integer sum keeps the result exact up to the final division.
  long long total = 0;
  for (size_t t = 0; t < preds.size(); ++t) total += std::llabs(preds[t].value - labels[t].value);
  return static_cast<double>(total) / static_cast<double>(preds.size());
}

InconsistencyCount inconsistency_count(const std::vector<std::vector<int>>& decisions) {
  InconsistencyCount out;
  if (decisions.empty()) return out;
  const size_t width = decisions.front().size();
  for (const auto& v : decisions) {
    if (v.size() != width) throw ShapeError("decision vectors have differing lengths");
    for (int d : v) {
      if (d != 0 && d != 1) throw InvalidArgument("decision entries must be 0 or 1");
    }
    if (!is_monotone_decision(v)) ++out.count;
  }
  out.rate = static_cast<double>(out.count) / static_cast<double>(decisions.size());
  return out;
}

std::string format_metrics(const MetricsReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "n=%lld accuracy=%.6f mae=%.6f", static_cast<long long>(r.n), r.accuracy, r.mae);
  std::string s(buf);
  if (r.inconsistency_rate) {
    std::snprintf(buf, sizeof(buf), " inconsistency_rate=%.6f", *r.inconsistency_rate);
    s += buf;
  }
  return s;
}

}  // namespace thor
