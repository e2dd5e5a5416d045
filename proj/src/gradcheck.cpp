#include "thor/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "thor/data.hpp"
#include "thor/trainer_internal.hpp"

namespace thor {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

GradcheckResult gradcheck_method(Method m, std::uint64_t seed, const GradcheckOptions& opt) {
  SyntheticSpec spec;
  spec.k = 4;
  spec.per_class = 3;
  spec.d = 5;
  spec.noise = 0.5;
  spec.transform_seed = seed;
  const auto ds = generate_synthetic(spec);

  TrainConfig cfg;
  cfg.method = m;
  cfg.seed = seed;
  cfg.hidden = opt.hidden;
  Predictor p = detail::init_predictor(cfg, spec.d, spec.k);
  if (m == Method::kCoral) {
    // Distinct, non-trivial bias units so every task contributes.
    for (Eigen::Index j = 0; j < p.coral.biases.size(); ++j) p.coral.biases(j) = 0.7 - 0.6 * static_cast<double>(j);
  }

  // Keep only pairs whose hinges and rectifiers are clear of their kinks.
  GradcheckResult result;
  std::vector<PairSample> pairs;
  detail::PairKinks kinks;
  for (const auto& pair : epoch_pairs(ds, seed)) {
    if (static_cast<int>(pairs.size()) == opt.pairs) break;
    detail::pair_loss_and_grad(p, ds, pair, cfg, nullptr, nullptr, &kinks);
    auto near = [&](double v) { return std::abs(v) <= opt.kink_guard; };
    if (std::any_of(kinks.hinge_args.begin(), kinks.hinge_args.end(), near) ||
        std::any_of(kinks.preactivations.begin(), kinks.preactivations.end(), near)) {
      ++result.excluded_pairs;
      continue;
    }
    pairs.push_back(pair);
  }
  if (pairs.empty()) return result;

  auto loss = [&]() {
    double total = 0.0;
    for (const auto& pair : pairs) total += detail::pair_loss_and_grad(p, ds, pair, cfg, nullptr, nullptr, nullptr);
    return total / static_cast<double>(pairs.size());
  };

  GradientBuffer grad(p.model);
  Eigen::VectorXd coral_grad = Eigen::VectorXd::Zero(p.coral.biases.size());
  for (const auto& pair : pairs) detail::pair_loss_and_grad(p, ds, pair, cfg, &grad, &coral_grad, nullptr);
  grad.scale(1.0 / static_cast<double>(pairs.size()));
  coral_grad /= static_cast<double>(pairs.size());

  auto record = [&](double analytic, double numeric) {
    const double err = relative_error(analytic, numeric);
    result.max_rel_error = std::max(result.max_rel_error, err);
    ++result.checked;
    if (err < opt.tolerance) ++result.passed;
  };

  for (size_t i = 0; i < p.model.parameter_count(); ++i) {
    const double orig = p.model.parameter(i);
    p.model.set_parameter(i, orig + opt.step);
    const double up = loss();
    p.model.set_parameter(i, orig - opt.step);
    const double down = loss();
    p.model.set_parameter(i, orig);
    record(grad[i], (up - down) / (2.0 * opt.step));
  }
  for (Eigen::Index j = 0; j < p.coral.biases.size(); ++j) {
    const double orig = p.coral.biases(j);
    p.coral.biases(j) = orig + opt.step;
    const double up = loss();
    p.coral.biases(j) = orig - opt.step;
    const double down = loss();
    p.coral.biases(j) = orig;
    record(coral_grad(j), (up - down) / (2.0 * opt.step));
  }
  return result;
}

}  // namespace thor
