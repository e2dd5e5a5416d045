#include "thor/losses.hpp"

#include <cmath>
#include <string>

namespace thor {

namespace {

void check_pair_class(RankLabel i, const Boundaries& b) {
  if (i.value < 1 || i.value > b.k() - 1) {
    throw InvalidPair("pair lower class " + std::to_string(i.value) + " has no upper neighbour in 1.." +
                      std::to_string(b.k()));
  }
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Binary cross-entropy of sigmoid(z) against bit, and its derivative in z.
double bce_with_logit(double z, int bit, double* dz) {
  *dz = sigmoid(z) - bit;
  return softplus(z) - bit * z;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kThor:
      return "thor";
    case Method::kOrcnn:
      return "orcnn";
    case Method::kCoral:
      return "coral";
    case Method::kCnnpor:
      return "cnnpor";
    case Method::kHybrid:
      return "hybrid";
  }
  return "thor";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  throw InvalidArgument("unknown method '" + std::string(name) + "' (expected thor|orcnn|coral|cnnpor|hybrid)");
}

void CnnporConfig::validate() const {
  if (!(c >= 0.0) || !(pair_margin >= 0.0)) throw InvalidArgument("cnnpor c and pair_margin must be >= 0");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softmax_cross_entropy(const Eigen::Ref<const Eigen::VectorXd>& logits, RankLabel y, Eigen::VectorXd* grad) {
  check_label(y, static_cast<int>(logits.size()));
  const double mx = logits.maxCoeff();
  const Eigen::VectorXd e = (logits.array() - mx).exp();
  const double sum = e.sum();
  const double value = std::log(sum) + mx - logits(y.value - 1);
  if (grad != nullptr) {
    *grad = e / sum;
    (*grad)(y.value - 1) -= 1.0;
  }
  return value;
}

LossValueAndGrad thor_pair_loss(double fi, double fj, RankLabel i, const Boundaries& b) {
  check_pair_class(i, b);
  const double g = b.margin();
  const double lo = b[i.value - 1];
  const double mid = b[i.value];
  const double hi = b[i.value + 1];

  const double t1 = g + lo - fi;   // x_i below its segment
  const double t2 = g - mid + fi;  // x_i above its segment
  const double t3 = g + mid - fj;  // x_j below its segment
  const double t4 = g - hi + fj;   // x_j above its segment

  LossValueAndGrad out;
  out.value = hinge(t1) + hinge(t2) + hinge(t3) + hinge(t4);
  const double dfi = (t1 > 0.0 ? -1.0 : 0.0) + (t2 > 0.0 ? 1.0 : 0.0);
  const double dfj = (t3 > 0.0 ? -1.0 : 0.0) + (t4 > 0.0 ? 1.0 : 0.0);
  out.d_outputs = {Eigen::VectorXd::Constant(1, dfi), Eigen::VectorXd::Constant(1, dfj)};
  return out;
}

int thor_violation_count(double fi, double fj, RankLabel i, const Boundaries& b) {
  check_pair_class(i, b);
  const double lo = b[i.value - 1];
  const double mid = b[i.value];
  const double hi = b[i.value + 1];
  return (fi < lo) + (fi > mid) + (fj < mid) + (fj > hi);
}

LossValueAndGrad orcnn_loss(const Eigen::Ref<const Eigen::VectorXd>& logits, const ExtendedBinaryLabel& target) {
  if (static_cast<size_t>(logits.size()) != target.size()) {
    throw ShapeError("orcnn: " + std::to_string(logits.size()) + " logits for " + std::to_string(target.size()) +
                     " tasks");
  }
  LossValueAndGrad out;
  Eigen::VectorXd d(logits.size());
  for (Eigen::Index k = 0; k < logits.size(); ++k) {
    out.value += bce_with_logit(logits(k), target[static_cast<size_t>(k)], &d(k));
  }
  out.d_outputs = {std::move(d)};
  return out;
}

LossValueAndGrad coral_loss(double shared_logit, const CoralHead& head, const ExtendedBinaryLabel& target) {
  if (static_cast<size_t>(head.biases.size()) != target.size()) {
    throw ShapeError("coral: " + std::to_string(head.biases.size()) + " biases for " +
                     std::to_string(target.size()) + " tasks");
  }
  LossValueAndGrad out;
  out.d_head.resize(head.biases.size());
  double d_shared = 0.0;
  for (Eigen::Index k = 0; k < head.biases.size(); ++k) {
    double dz = 0.0;
    out.value += bce_with_logit(shared_logit + head.biases(k), target[static_cast<size_t>(k)], &dz);
    out.d_head(k) = dz;
    d_shared += dz;
  }
  out.d_outputs = {Eigen::VectorXd::Constant(1, d_shared)};
  return out;
}

LossValueAndGrad cnnpor_loss(const Eigen::Ref<const Eigen::VectorXd>& class_logits_i,
                             const Eigen::Ref<const Eigen::VectorXd>& class_logits_j, RankLabel yi, RankLabel yj,
                             double ri, double rj, const CnnporConfig& cfg) {
  cfg.validate();
  if (class_logits_i.size() != class_logits_j.size()) throw ShapeError("cnnpor: logit widths differ");
  if (yj.value != yi.value + 1) {
    throw InvalidPair("cnnpor: pair labels " + std::to_string(yi.value) + "," + std::to_string(yj.value) +
                      " are not adjacent");
  }
  LossValueAndGrad out;
  Eigen::VectorXd gi, gj;
  out.value = softmax_cross_entropy(class_logits_i, yi, &gi) + softmax_cross_entropy(class_logits_j, yj, &gj);
  const double arg = cfg.pair_margin - (rj - ri);
  out.value += cfg.c * hinge(arg);
  const double active = arg > 0.0 ? cfg.c : 0.0;
  out.d_outputs = {std::move(gi), std::move(gj), Eigen::VectorXd::Constant(1, active),
                   Eigen::VectorXd::Constant(1, -active)};
  return out;
}

LossValueAndGrad hybrid_loss(const Eigen::Ref<const Eigen::VectorXd>& class_logits_i,
                             const Eigen::Ref<const Eigen::VectorXd>& class_logits_j, double fi, double fj,
                             RankLabel i, const Boundaries& b, double c) {
  if (!(c >= 0.0)) throw InvalidArgument("hybrid weight c must be >= 0");
  if (class_logits_i.size() != b.k() || class_logits_j.size() != b.k()) {
    throw ShapeError("hybrid: classification logits must have K entries");
  }
  const RankLabel j(i.value + 1);
  auto th = thor_pair_loss(fi, fj, i, b);
  LossValueAndGrad out;
  Eigen::VectorXd gi, gj;
  out.value = softmax_cross_entropy(class_logits_i, i, &gi) + softmax_cross_entropy(class_logits_j, j, &gj) +
              c * th.value;
  out.d_outputs = {std::move(gi), std::move(gj), c * th.d_outputs[0], c * th.d_outputs[1]};
  return out;
}

}  // namespace thor
