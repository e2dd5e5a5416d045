#include "thor/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "thor/sampler.hpp"
#include "thor/trainer_internal.hpp"

namespace thor {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int argmax(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return static_cast<int>(best);
}

std::vector<int> decide(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  std::vector<int> d(static_cast<size_t>(logits.size()));
  for (Eigen::Index k = 0; k < logits.size(); ++k) d[static_cast<size_t>(k)] = sigmoid(logits(k)) > 0.5 ? 1 : 0;
  return d;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::istringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) out.push_back(parse_double(tok));
  return out;
}

}  // namespace

std::string_view head_name(InferenceHead h) {
  switch (h) {
    case InferenceHead::kDefault:
      return "default";
    case InferenceHead::kClassification:
      return "classification";
    case InferenceHead::kRegression:
      return "regression";
  }
  return "default";
}

InferenceHead parse_head(std::string_view name) {
  if (name == "default") return InferenceHead::kDefault;
  if (name == "classification") return InferenceHead::kClassification;
  if (name == "regression") return InferenceHead::kRegression;
  throw InvalidArgument("unknown inference head '" + std::string(name) + "' (expected classification|regression)");
}

int output_width(Method m, int k) {
  check_class_count(k);
  switch (m) {
    case Method::kThor:
    case Method::kCoral:
      return 1;
    case Method::kOrcnn:
      return k - 1;
    case Method::kCnnpor:
    case Method::kHybrid:
      return k + 1;
  }
  return 1;
}

Predictions predict_ranks(const Predictor& p, const OrdinalDataset& ds, InferenceHead head) {
  const int k = p.k();
  if (ds.k() != k) throw ShapeError("dataset has K=" + std::to_string(ds.k()) + ", model has K=" + std::to_string(k));
  if (p.model.output_width() != output_width(p.method, k)) {
    throw ShapeError("model output width " + std::to_string(p.model.output_width()) + " does not match method " +
                     std::string(method_name(p.method)));
  }
  if (p.method == Method::kHybrid && head == InferenceHead::kDefault) {
    throw InvalidArgument("hybrid models need an inference head: classification or regression");
  }
  if (p.method == Method::kCnnpor && head == InferenceHead::kRegression) {
    throw InvalidArgument("cnnpor's regression output is a ranking score without boundaries; use classification");
  }
  if ((p.method == Method::kThor || p.method == Method::kOrcnn || p.method == Method::kCoral) &&
      head != InferenceHead::kDefault) {
    throw InvalidArgument(std::string(method_name(p.method)) + " has a single inference head");
  }

  Predictions out;
  out.ranks.reserve(static_cast<size_t>(ds.size()));
  for (Eigen::Index r = 0; r < ds.size(); ++r) {
    const Eigen::VectorXd y = predict(p.model, ds.row(r).transpose());
    switch (p.method) {
      case Method::kThor:
        out.ranks.push_back(infer_rank_threshold(y(0), p.boundaries));
        break;
      case Method::kOrcnn: {
        auto d = decide(y);
        out.ranks.push_back(infer_rank_binary(d));
        out.decisions.push_back(std::move(d));
        break;
      }
      case Method::kCoral: {
        auto d = decide((p.coral.biases.array() + y(0)).matrix());
        out.ranks.push_back(infer_rank_binary(d));
        out.decisions.push_back(std::move(d));
        break;
      }
      case Method::kCnnpor:
      case Method::kHybrid:
        if (head == InferenceHead::kRegression) {
          out.ranks.push_back(infer_rank_threshold(y(k), p.boundaries));
        } else {
          out.ranks.emplace_back(argmax(y.head(k)) + 1);
        }
        break;
    }
  }
  return out;
}

MetricsReport evaluate(const Predictor& p, const OrdinalDataset& ds, InferenceHead head) {
  const auto pred = predict_ranks(p, ds, head);
  MetricsReport r;
  r.n = ds.size();
  r.accuracy = accuracy(pred.ranks, ds.labels());
  r.mae = mae(pred.ranks, ds.labels());
  if (p.method == Method::kOrcnn || p.method == Method::kCoral) {
    r.inconsistency_rate = inconsistency_count(pred.decisions).rate;
  }
  return r;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw InvalidArgument("learning rate must be finite and > 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be finite and >= 0");
  for (int w : hidden) {
    if (w < 1) throw InvalidArgument("invalid architecture: hidden widths must be >= 1");
  }
  cnnpor.validate();
  if (!(hybrid_c >= 0.0)) throw InvalidArgument("hybrid weight must be >= 0");
  if (hybrid_head == InferenceHead::kDefault) throw InvalidArgument("hybrid validation head must be explicit");
}

Boundaries TrainConfig::boundaries(int k) const {
  if (!thresholds) return default_boundaries(k).with_margin(gamma);
  Boundaries b(*thresholds, gamma);
  if (b.k() != k) {
    throw InvalidArgument("boundary vector has " + std::to_string(thresholds->size()) + " values; K=" +
                          std::to_string(k) + " needs " + std::to_string(k + 1));
  }
  return b;
}

namespace detail {

double pair_loss_and_grad(const Predictor& p, const OrdinalDataset& ds, const PairSample& pair, const TrainConfig& cfg,
                          GradientBuffer* grad, Eigen::VectorXd* coral_grad, PairKinks* kinks) {
  const auto lo = forward(p.model, ds.row(pair.lower_row).transpose());
  const auto up = forward(p.model, ds.row(pair.upper_row).transpose());
  const int k = p.k();
  const RankLabel yi = pair.lower_class;
  const RankLabel yj = pair.upper_class();
  const Eigen::VectorXd& oi = lo.outputs;
  const Eigen::VectorXd& oj = up.outputs;

  Eigen::VectorXd di = Eigen::VectorXd::Zero(oi.size());
  Eigen::VectorXd dj = Eigen::VectorXd::Zero(oj.size());
  double value = 0.0;
  if (kinks != nullptr) kinks->hinge_args.clear();

  switch (p.method) {
    case Method::kThor: {
      auto l = thor_pair_loss(oi(0), oj(0), yi, p.boundaries);
      value = l.value;
      di = l.d_outputs[0];
      dj = l.d_outputs[1];
      if (kinks != nullptr) {
        const double g = p.boundaries.margin();
        kinks->hinge_args = {g + p.boundaries.lower(yi) - oi(0), g - p.boundaries.upper(yi) + oi(0),
                             g + p.boundaries.lower(yj) - oj(0), g - p.boundaries.upper(yj) + oj(0)};
      }
      break;
    }
    case Method::kOrcnn: {
      auto a = orcnn_loss(oi, encode_extended_binary(yi, k));
      auto b = orcnn_loss(oj, encode_extended_binary(yj, k));
      value = a.value + b.value;
      di = a.d_outputs[0];
      dj = b.d_outputs[0];
      break;
    }
    case Method::kCoral: {
      auto a = coral_loss(oi(0), p.coral, encode_extended_binary(yi, k));
      auto b = coral_loss(oj(0), p.coral, encode_extended_binary(yj, k));
      value = a.value + b.value;
      di = a.d_outputs[0];
      dj = b.d_outputs[0];
      if (coral_grad != nullptr) *coral_grad += a.d_head + b.d_head;
      break;
    }
    case Method::kCnnpor:
    case Method::kHybrid: {
      LossValueAndGrad l;
      if (p.method == Method::kCnnpor) {
        l = cnnpor_loss(oi.head(k), oj.head(k), yi, yj, oi(k), oj(k), cfg.cnnpor);
        if (kinks != nullptr) kinks->hinge_args = {cfg.cnnpor.pair_margin - (oj(k) - oi(k))};
      } else {
        l = hybrid_loss(oi.head(k), oj.head(k), oi(k), oj(k), yi, p.boundaries, cfg.hybrid_c);
        if (kinks != nullptr) {
          const double g = p.boundaries.margin();
          kinks->hinge_args = {g + p.boundaries.lower(yi) - oi(k), g - p.boundaries.upper(yi) + oi(k),
                               g + p.boundaries.lower(yj) - oj(k), g - p.boundaries.upper(yj) + oj(k)};
        }
      }
      value = l.value;
      di.head(k) = l.d_outputs[0];
      dj.head(k) = l.d_outputs[1];
      di(k) = l.d_outputs[2](0);
      dj(k) = l.d_outputs[3](0);
      break;
    }
  }

  if (kinks != nullptr) {
    kinks->preactivations.clear();
    for (const auto* tape : {&lo.tape, &up.tape}) {
      for (size_t layer = 0; layer + 1 < tape->pre.size(); ++layer) {
        for (Eigen::Index u = 0; u < tape->pre[layer].size(); ++u) kinks->preactivations.push_back(tape->pre[layer](u));
      }
    }
  }
  if (grad != nullptr) {
    backward_accumulate(p.model, lo.tape, di, *grad);
    backward_accumulate(p.model, up.tape, dj, *grad);
  }
  return value;
}

Predictor init_predictor(const TrainConfig& cfg, int input_dim, int k) {
  const Boundaries b = cfg.boundaries(k);
  if ((cfg.method == Method::kThor || cfg.method == Method::kHybrid) && !cfg.allow_infeasible_margin) {
    b.require_feasible_margin();
  }
  Predictor p{cfg.method, b, init_model(input_dim, cfg.hidden, output_width(cfg.method, k), cfg.seed, cfg.activation),
              CoralHead{}};
  if (cfg.method == Method::kCoral) p.coral.biases = Eigen::VectorXd::Zero(k - 1);
  return p;
}

}  // namespace detail

double pair_batch_loss(const Predictor& p, const OrdinalDataset& ds, std::span<const PairSample> pairs,
                       const TrainConfig& cfg) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& pair : pairs) total += detail::pair_loss_and_grad(p, ds, pair, cfg, nullptr, nullptr, nullptr);
  return total / static_cast<double>(pairs.size());
}

TrainReport train(const OrdinalDataset& train_set, const OrdinalDataset& val_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.k() != val_set.k()) throw ShapeError("train and validation sets disagree on K");
  if (train_set.dim() != val_set.dim()) throw ShapeError("train and validation sets disagree on feature dimension");
  const int k = train_set.k();
  const InferenceHead val_head = cfg.method == Method::kHybrid   ? cfg.hybrid_head
                                 : cfg.method == Method::kCnnpor ? InferenceHead::kClassification
                                                                 : InferenceHead::kDefault;

  Predictor current = detail::init_predictor(cfg, static_cast<int>(train_set.dim()), k);
  std::optional<Predictor> best;
  TrainReport report{{}, 0, {}, current};
  GradientBuffer grad(current.model);
  Eigen::VectorXd coral_grad;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto pairs = epoch_pairs(train_set, splitmix64(cfg.seed ^ (static_cast<std::uint64_t>(epoch) << 32)));
    double loss_sum = 0.0;
    int batch_index = 0;
    for (size_t start = 0; start < pairs.size(); start += static_cast<size_t>(cfg.batch_size), ++batch_index) {
      const size_t end = std::min(pairs.size(), start + static_cast<size_t>(cfg.batch_size));
      const double scale = 1.0 / static_cast<double>(end - start);
      grad.zero();
      if (current.method == Method::kCoral) coral_grad = Eigen::VectorXd::Zero(k - 1);
      for (size_t i = start; i < end; ++i) {
        loss_sum += detail::pair_loss_and_grad(current, train_set, pairs[i], cfg, &grad, &coral_grad, nullptr);
      }
      grad.scale(scale);
      try {
        if (current.method == Method::kCoral) {
          coral_grad *= scale;
          if (!coral_grad.allFinite()) throw NumericFault("non-finite CORAL bias gradient");
        }
        sgd_step(current.model, grad, cfg.lr);
        if (current.method == Method::kCoral) current.coral.biases -= cfg.lr * coral_grad;
      } catch (const NumericFault& e) {
        throw NumericFault("numeric fault at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + e.what());
      }
    }

    const auto m = evaluate(current, val_set, val_head);
    report.epochs.push_back({loss_sum / static_cast<double>(pairs.size()), m.mae, m.accuracy});
    const auto& rec = report.epochs.back();
    bool improved = !best;
    if (best) {
      const auto& prev = report.epochs[static_cast<size_t>(report.best_epoch - 1)];
      improved = cfg.select_on == SelectOn::kMae ? rec.val_mae < prev.val_mae : rec.val_acc > prev.val_acc;
    }
    if (improved) {
      report.best_epoch = epoch;
      best = current;
    }
  }

  report.best = *best;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    report.best_checkpoint = cfg.out_dir / "best.ckpt";
    save_predictor(report.best_checkpoint, report.best);
    write_report(cfg.out_dir / "report.txt", report);
  }
  return report;
}

void save_predictor(const std::filesystem::path& path, const Predictor& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write checkpoint '" + path.string() + "'");
  save_checkpoint(out, p.model);
  out << "method=" << method_name(p.method) << '\n';
  out << "thresholds=" << join_doubles(p.boundaries.thresholds()) << '\n';
  out << "margin=" << format_double(p.boundaries.margin()) << '\n';
  if (p.method == Method::kCoral) {
    out << "coral_biases="
        << join_doubles(std::vector<double>(p.coral.biases.data(), p.coral.biases.data() + p.coral.biases.size()))
        << '\n';
  }
  if (!out) throw InvalidArgument("failed writing checkpoint '" + path.string() + "'");
}

Predictor load_predictor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open checkpoint '" + path.string() + "'");
  DenseModel model = load_checkpoint(in);
  std::optional<Method> method;
  std::optional<std::vector<double>> thresholds;
  double margin = 0.0;
  std::vector<double> biases;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("checkpoint: unexpected line '" + line + "'", 0);
    const auto key = line.substr(0, eq);
    const auto val = line.substr(eq + 1);
    if (key == "method") {
      method = parse_method(val);
    } else if (key == "thresholds") {
      thresholds = parse_doubles(val);
    } else if (key == "margin") {
      margin = parse_double(val);
    } else if (key == "coral_biases") {
      biases = parse_doubles(val);
    } else {
      throw ParseError("checkpoint: unknown key '" + key + "'", 0);
    }
  }
  if (!method || !thresholds) throw ParseError("checkpoint lacks method/thresholds metadata", 0);
  Predictor p{*method, Boundaries(*thresholds, margin), std::move(model), CoralHead{}};
  if (p.model.output_width() != output_width(p.method, p.k())) {
    throw ShapeError("checkpoint output width does not match method " + std::string(method_name(p.method)));
  }
  if (p.method == Method::kCoral) {
    if (static_cast<int>(biases.size()) != p.k() - 1) throw ShapeError("checkpoint CORAL bias count != K-1");
    p.coral.biases = Eigen::Map<Eigen::VectorXd>(biases.data(), static_cast<Eigen::Index>(biases.size()));
  }
  return p;
}

void write_report(const std::filesystem::path& path, const TrainReport& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write report '" + path.string() + "'");
  char buf[200];
  for (size_t e = 0; e < r.epochs.size(); ++e) {
    const auto& rec = r.epochs[e];
    std::snprintf(buf, sizeof(buf), "epoch=%zu train_loss=%.6f val_mae=%.6f val_acc=%.6f\n", e + 1, rec.train_loss,
                  rec.val_mae, rec.val_acc);
    out << buf;
  }
  out << "best_epoch=" << r.best_epoch << '\n';
  out << "best_checkpoint=" << r.best_checkpoint.filename().string() << '\n';
}

}  // namespace thor
