#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "thor/bench.hpp"
#include "thor/data.hpp"
#include "thor/gradcheck.hpp"
#include "thor/trainer.hpp"

namespace thor::cli {

namespace {

struct DataOptions {
  std::string source = "synth";
  int k = 5;
  bool has_header = false;
  int per_class = 200;
  int d = 8;
  double noise = 0.5;
  double label_noise = 0.0;

  bool synthetic() const { return source == "synth"; }
};

struct TrainOptions {
  std::string method = "thor";
  int epochs = 100;
  int batch_size = 32;
  double lr = 0.01;
  double gamma = 0.5;
  std::string hidden = "64,32";
  std::string boundaries;
  std::string select_on = "mae";
  std::string activation = "relu";
  double cnnpor_c = 1.0;
  double pair_margin = 1.0;
  double hybrid_c = 1.0;
  bool allow_infeasible = false;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_list(s)) out.push_back(parse_double(tok));
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split_list(s)) {
    try {
      size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw InvalidArgument("not an integer: '" + tok + "'");
    }
  }
  return out;
}

void add_data_options(CLI::App* cmd, DataOptions& o) {
  cmd->add_option("--data", o.source, "'synth' or a CSV path (f1,...,fd,label)")->capture_default_str();
  cmd->add_option("--k", o.k, "Number of ordinal classes")->capture_default_str();
  cmd->add_flag("--has-header", o.has_header, "CSV file starts with a header row");
  cmd->add_option("--per-class", o.per_class, "Synthetic examples per class")->capture_default_str();
  cmd->add_option("--d", o.d, "Synthetic feature dimension")->capture_default_str();
  cmd->add_option("--noise", o.noise, "Synthetic latent noise std-dev")->capture_default_str();
  cmd->add_option("--label-noise", o.label_noise, "Synthetic +-1 label flip probability")->capture_default_str();
}

void add_train_options(CLI::App* cmd, TrainOptions& o, bool with_method) {
  if (with_method) {
    cmd->add_option("--method", o.method, "thor | orcnn | coral | cnnpor | hybrid")->capture_default_str();
  }
  cmd->add_option("--epochs", o.epochs)->capture_default_str();
  cmd->add_option("--batch-size", o.batch_size)->capture_default_str();
  cmd->add_option("--lr", o.lr, "SGD learning rate")->capture_default_str();
  cmd->add_option("--gamma", o.gamma, "Margin of the threshold loss")->capture_default_str();
  cmd->add_option("--hidden", o.hidden, "Comma-separated hidden widths ('' for a linear model)")
      ->capture_default_str();
  cmd->add_option("--boundaries", o.boundaries, "Comma-separated K+1 thresholds (default -1,0,...,K-1)");
  cmd->add_option("--select-on", o.select_on, "mae | accuracy")->capture_default_str();
  cmd->add_option("--activation", o.activation, "relu | tanh | identity")->capture_default_str();
  cmd->add_option("--cnnpor-c", o.cnnpor_c, "Weight of the cnnpor pairwise term")->capture_default_str();
  cmd->add_option("--pair-margin", o.pair_margin, "Margin of the cnnpor pairwise hinge")->capture_default_str();
  cmd->add_option("--hybrid-c", o.hybrid_c, "Weight of the threshold term in hybrid")->capture_default_str();
  cmd->add_flag("--allow-infeasible-margin", o.allow_infeasible,
                "Train even if gamma exceeds half the narrowest segment");
}

OrdinalDataset load_data(const DataOptions& o, std::uint64_t seed) {
  if (o.synthetic()) {
    SyntheticSpec spec;
    spec.k = o.k;
    spec.per_class = o.per_class;
    spec.d = o.d;
    spec.noise = o.noise;
    spec.label_noise = o.label_noise;
    spec.transform_seed = seed;
    return generate_synthetic(spec);
  }
  return load_csv(o.source, o.k, o.has_header);
}

TrainConfig make_config(const TrainOptions& o, std::uint64_t seed, const std::string& out_dir) {
  TrainConfig cfg;
  cfg.method = parse_method(o.method);
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.lr = o.lr;
  cfg.gamma = o.gamma;
  cfg.seed = seed;
  cfg.hidden = parse_int_list(o.hidden);
  if (!o.boundaries.empty()) cfg.thresholds = parse_double_list(o.boundaries);
  if (o.select_on == "mae") {
    cfg.select_on = SelectOn::kMae;
  } else if (o.select_on == "accuracy") {
    cfg.select_on = SelectOn::kAccuracy;
  } else {
    throw InvalidArgument("--select-on must be mae or accuracy");
  }
  cfg.activation = parse_activation(o.activation);
  cfg.cnnpor.c = o.cnnpor_c;
  cfg.cnnpor.pair_margin = o.pair_margin;
  cfg.hybrid_c = o.hybrid_c;
  cfg.allow_infeasible_margin = o.allow_infeasible;
  cfg.out_dir = out_dir;
  cfg.validate();
  return cfg;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw InvalidArgument("cannot write '" + path.string() + "'");
}

std::string metrics_lines(const Predictor& p, const OrdinalDataset& ds) {
  std::string s;
  if (p.method == Method::kHybrid) {
    for (InferenceHead h : {InferenceHead::kClassification, InferenceHead::kRegression}) {
      s += "head=" + std::string(head_name(h)) + " " + format_metrics(evaluate(p, ds, h)) + "\n";
    }
  } else {
    s += format_metrics(evaluate(p, ds)) + "\n";
  }
  return s;
}

// Flags from `--config <file>` (key=value lines, '#' comments) that are not
// given explicitly are spliced in right after the subcommand name.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  std::string path;
  std::vector<std::string> rest;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) {
    if (it != args.end()) throw InvalidArgument("--config needs a file");
    return args;
  }
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config '" + path + "'");
  auto given = [&](const std::string& flag) {
    return std::any_of(rest.begin(), rest.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  long line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path + ":" + std::to_string(line_no) + ": expected key=value", line_no);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (value == "true" || value == "false") {
      if (value == "true") extra.push_back(flag);
    } else {
      extra.push_back(flag + "=" + value);
    }
  }
  if (rest.empty()) return extra;
  std::vector<std::string> out{rest.front()};
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Threshold-based ordinal regression toolkit", "thor"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::uint64_t seed = 42;
  std::string out_dir;
  int jobs = 1;
  DataOptions data;
  TrainOptions topt;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Seed for data generation, splitting, init and sampling")->capture_default_str();
    cmd->add_option("--out-dir", out_dir, "Directory for outputs");
    // Consumed by expand_config(); declared so it shows up in --help.
    cmd->add_option("--config", "key=value file; explicit flags take precedence");
  };

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic ordinal dataset as CSV");
  common(gen);
  add_data_options(gen, data);

  auto* trn = app.add_subcommand("train", "Train one method and write best.ckpt, report.txt, metrics.txt");
  common(trn);
  add_data_options(trn, data);
  add_train_options(trn, topt, true);

  std::string checkpoint;
  std::string head = "default";
  std::string which_split;
  auto* evl = app.add_subcommand("eval", "Evaluate a checkpoint");
  common(evl);
  add_data_options(evl, data);
  evl->add_option("--checkpoint", checkpoint, "Checkpoint written by train")->required();
  evl->add_option("--head", head, "classification | regression (two-headed models)")->capture_default_str();
  evl->add_option("--split", which_split, "all | train | val | test (default: test for synth, all for CSV)");

  std::string methods = "thor,orcnn,coral,cnnpor";
  std::string format = "text";
  auto* cmp = app.add_subcommand("compare", "Train several methods on identical splits and tabulate test metrics");
  common(cmp);
  add_data_options(cmp, data);
  add_train_options(cmp, topt, false);
  cmp->add_option("--methods", methods, "Comma-separated methods")->capture_default_str();
  cmp->add_option("--format", format, "text | csv")->capture_default_str();
  cmp->add_option("--jobs", jobs, "Concurrent training runs")->capture_default_str();

  std::string gammas = "0,0.1,0.2,0.3,0.4,0.5";
  auto* swp = app.add_subcommand("sweep-gamma", "Train THOR for several margins and emit gamma,accuracy,mae");
  common(swp);
  add_data_options(swp, data);
  add_train_options(swp, topt, false);
  swp->add_option("--gammas", gammas, "Comma-separated margins")->capture_default_str();
  swp->add_option("--jobs", jobs, "Concurrent training runs")->capture_default_str();

  std::string gc_method = "all";
  int gc_seeds = 20;
  auto* gck = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  gck->add_option("--method", gc_method, "A method name or 'all'")->capture_default_str();
  gck->add_option("--seeds", gc_seeds, "Random models per method")->capture_default_str();
  gck->add_option("--seed", seed, "First seed")->capture_default_str();

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  auto need_out_dir = [&]() {
    if (out_dir.empty()) throw InvalidArgument("--out-dir is required");
    std::filesystem::create_directories(out_dir);
    return std::filesystem::path(out_dir);
  };

  try {
    if (gen->parsed()) {
      const auto dir = need_out_dir();
      if (!data.synthetic()) throw InvalidArgument("gen-data only supports --data synth");
      const auto ds = load_data(data, seed);
      write_csv(dir / "data.csv", ds, true);
      out << "wrote " << ds.size() << " rows to " << (dir / "data.csv").string() << '\n';
    } else if (trn->parsed()) {
      const auto dir = need_out_dir();
      const auto ds = load_data(data, seed);
      const auto splits = split(ds, {}, seed);
      const auto cfg = make_config(topt, seed, dir.string());
      const auto report = train(splits.train, splits.val, cfg);
      const std::string metrics = metrics_lines(report.best, splits.test);
      write_text(dir / "metrics.txt", metrics);
      out << "best_epoch=" << report.best_epoch << '\n' << metrics;
    } else if (evl->parsed()) {
      const auto p = load_predictor(checkpoint);
      const auto ds = load_data(data, seed);
      std::string part = which_split.empty() ? (data.synthetic() ? "test" : "all") : which_split;
      std::optional<OrdinalDataset> subset;
      if (part == "all") {
        subset = ds;
      } else {
        auto splits = split(ds, {}, seed);
        if (part == "train") {
          subset = std::move(splits.train);
        } else if (part == "val") {
          subset = std::move(splits.val);
        } else if (part == "test") {
          subset = std::move(splits.test);
        } else {
          throw InvalidArgument("--split must be all, train, val or test");
        }
      }
      const std::string line = format_metrics(evaluate(p, *subset, parse_head(head))) + "\n";
      out << line;
      if (!out_dir.empty()) write_text(need_out_dir() / "eval.txt", line);
    } else if (cmp->parsed()) {
      const auto dir = need_out_dir();
      std::vector<Method> ms;
      for (const auto& name : split_list(methods)) ms.push_back(parse_method(name));
      if (format != "text" && format != "csv") throw InvalidArgument("--format must be text or csv");
      const auto ds = load_data(data, seed);
      const auto splits = split(ds, {}, seed);
      const auto cfg = make_config(topt, seed, dir.string());
      const auto table = compare(ms, splits, cfg, jobs);
      const auto csv = comparison_csv(table);
      const auto text = comparison_text(table);
      write_text(dir / "comparison.csv", csv);
      write_text(dir / "comparison.txt", text);
      out << (format == "csv" ? csv : text);
    } else if (swp->parsed()) {
      const auto dir = need_out_dir();
      const auto ds = load_data(data, seed);
      const auto splits = split(ds, {}, seed);
      auto cfg = make_config(topt, seed, "");
      const auto series = sweep_gamma(parse_double_list(gammas), splits, cfg, topt.allow_infeasible, jobs);
      const auto csv = sweep_csv(series);
      write_text(dir / "sweep.csv", csv);
      out << csv;
    } else if (gck->parsed()) {
      std::vector<Method> ms;
      if (gc_method == "all") {
        ms.assign(std::begin(kAllMethods), std::end(kAllMethods));
      } else {
        ms.push_back(parse_method(gc_method));
      }
      if (gc_seeds < 1) throw InvalidArgument("--seeds must be >= 1");
      GradcheckOptions opt;
      bool ok = true;
      for (Method m : ms) {
        double worst = 0.0;
        size_t checked = 0;
        for (int s = 0; s < gc_seeds; ++s) {
          const auto r = gradcheck_method(m, seed + static_cast<std::uint64_t>(s), opt);
          worst = std::max(worst, r.max_rel_error);
          checked += r.checked;
        }
        ok = ok && checked > 0 && worst < opt.tolerance;
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-7s max_rel_error=%.3e parameters=%zu", std::string(method_name(m)).c_str(),
                      worst, checked);
        out << buf << '\n';
      }
      return ok ? 0 : 1;
    }
  } catch (const NumericFault& e) {
    err << "numeric fault: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace thor::cli
