#include "thor/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <functional>
#include <thread>

namespace thor {

namespace {

// Runs task(i) for i in [0, n) on up to `jobs` threads. Rethrows the
// lowest-index failure.
void run_jobs(size_t n, int jobs, const std::function<void(size_t)>& task) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const size_t threads = std::min(n, static_cast<size_t>(std::max(jobs, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

[[noreturn]] void rethrow_annotated(const std::string& context) {
  try {
    throw;
  } catch (const NumericFault& e) {
    throw NumericFault(context + ": " + e.what());
  } catch (const UncoverableClass& e) {
    throw UncoverableClass(context + ": " + e.what(), e.label());
  } catch (const InfeasibleMargin& e) {
    throw InfeasibleMargin(context + ": " + e.what());
  } catch (const Error& e) {
    throw Error(context + ": " + e.what());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

ComparisonTable compare(const std::vector<Method>& methods, const DatasetSplits& splits, const TrainConfig& cfg,
                        int jobs) {
  if (methods.empty()) throw InvalidArgument("compare needs at least one method");
  std::vector<std::vector<ComparisonRow>> rows(methods.size());
  run_jobs(methods.size(), jobs, [&](size_t i) {
    const Method m = methods[i];
    const std::string name(method_name(m));
    try {
      TrainConfig run = cfg;
      run.method = m;
      if (!cfg.out_dir.empty()) run.out_dir = cfg.out_dir / name;
      const auto report = train(splits.train, splits.val, run);
      if (m == Method::kHybrid) {
        for (InferenceHead h : {InferenceHead::kClassification, InferenceHead::kRegression}) {
          rows[i].push_back({name + "-" + std::string(head_name(h)), m, evaluate(report.best, splits.test, h)});
        }
      } else {
        rows[i].push_back({name, m, evaluate(report.best, splits.test)});
      }
    } catch (...) {
      rethrow_annotated("method " + name);
    }
  });
  ComparisonTable t;
  for (auto& r : rows) t.rows.insert(t.rows.end(), r.begin(), r.end());
  return t;
}

std::string comparison_csv(const ComparisonTable& t) {
  std::string s = "method,accuracy,mae,inconsistency_rate\n";
  for (const auto& r : t.rows) {
    s += r.label + "," + fmt(r.metrics.accuracy) + "," + fmt(r.metrics.mae) + ",";
    if (r.metrics.inconsistency_rate) s += fmt(*r.metrics.inconsistency_rate);
    s += "\n";
  }
  return s;
}

std::string comparison_text(const ComparisonTable& t) {
  // Rank marks per column: higher accuracy is better, lower MAE is better.
  auto marks = [&](auto value, bool higher_better) {
    std::vector<double> vals;
    for (const auto& r : t.rows) vals.push_back(value(r));
    std::vector<double> distinct = vals;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (higher_better) std::reverse(distinct.begin(), distinct.end());
    std::vector<std::string> out;
    for (double v : vals) {
      if (!distinct.empty() && v == distinct[0]) {
        out.push_back("*");
      } else if (distinct.size() > 1 && v == distinct[1]) {
        out.push_back("+");
      } else {
        out.push_back(" ");
      }
    }
    return out;
  };
  const auto acc_marks = marks([](const ComparisonRow& r) { return r.metrics.accuracy; }, true);
  const auto mae_marks = marks([](const ComparisonRow& r) { return r.metrics.mae; }, false);

  size_t width = 6;
  for (const auto& r : t.rows) width = std::max(width, r.label.size());
  char buf[256];
  std::string s;
  std::snprintf(buf, sizeof(buf), "%-*s  %-9s  %-9s  %s\n", static_cast<int>(width), "method", "accuracy", "mae",
                "inconsistency_rate");
  s += buf;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string rate = r.metrics.inconsistency_rate ? fmt(*r.metrics.inconsistency_rate) : "-";
    std::snprintf(buf, sizeof(buf), "%-*s  %s%s  %s%s  %s\n", static_cast<int>(width), r.label.c_str(),
                  fmt(r.metrics.accuracy).c_str(), acc_marks[i].c_str(), fmt(r.metrics.mae).c_str(),
                  mae_marks[i].c_str(), rate.c_str());
    s += buf;
  }
  s += "(* best, + second best)\n";
  return s;
}

std::vector<SweepPoint> sweep_gamma(const std::vector<double>& gammas, const DatasetSplits& splits,
                                    const TrainConfig& cfg, bool allow_infeasible, int jobs) {
  if (gammas.empty()) throw InvalidArgument("sweep needs at least one gamma");
  const int k = splits.train.k();
  for (double g : gammas) {
    const Boundaries b = cfg.boundaries(k).with_margin(g);  // rejects negative margins
    if (!allow_infeasible) b.require_feasible_margin();
  }
  std::vector<SweepPoint> out(gammas.size());
  run_jobs(gammas.size(), jobs, [&](size_t i) {
    try {
      TrainConfig run = cfg;
      run.method = Method::kThor;
      run.gamma = gammas[i];
      run.allow_infeasible_margin = allow_infeasible;
      run.out_dir.clear();
      const auto report = train(splits.train, splits.val, run);
      const auto m = evaluate(report.best, splits.test);
      out[i] = {gammas[i], m.accuracy, m.mae};
    } catch (...) {
      rethrow_annotated("gamma " + fmt(gammas[i]));
    }
  });
  return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& s) {
  std::string out = "gamma,accuracy,mae\n";
  for (const auto& p : s) out += fmt(p.gamma) + "," + fmt(p.accuracy) + "," + fmt(p.mae) + "\n";
  return out;
}

}  // namespace thor
