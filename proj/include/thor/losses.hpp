#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "thor/core.hpp"

namespace thor {

enum class Method { kThor, kOrcnn, kCoral, kCnnpor, kHybrid };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);
inline constexpr Method kAllMethods[] = {Method::kThor, Method::kOrcnn, Method::kCoral, Method::kCnnpor,
                                         Method::kHybrid};

// Loss value plus its gradient w.r.t. each group of outputs that produced
// it. The grouping is loss-specific and documented on each function.
struct LossValueAndGrad {
  double value = 0.0;
  std::vector<Eigen::VectorXd> d_outputs;
  Eigen::VectorXd d_head;  // CORAL bias units; empty for the other losses
};

struct CnnporConfig {
  double c = 1.0;
  double pair_margin = 1.0;

  void validate() const;
};

// K-1 independent bias units on top of one shared logit.
struct CoralHead {
  int shared_score_index = 0;
  Eigen::VectorXd biases;
};

// [x]_+ with subgradient 0 at the kink.
inline double hinge(double x) { return x > 0.0 ? x : 0.0; }

double sigmoid(double z);
// -log softmax(logits)[y-1] and its gradient softmax - onehot.
double softmax_cross_entropy(const Eigen::Ref<const Eigen::VectorXd>& logits, RankLabel y,
                             Eigen::VectorXd* grad);

// Four-hinge pairwise loss for x_i of class i and x_j of class i+1.
// Groups: {[d f_i], [d f_j]}.
LossValueAndGrad thor_pair_loss(double fi, double fj, RankLabel i, const Boundaries& b);

// Strict segment violations of the pair, 0..4.
int thor_violation_count(double fi, double fj, RankLabel i, const Boundaries& b);

// Sum of per-task sigmoid cross-entropies. Groups: {d logits}.
LossValueAndGrad orcnn_loss(const Eigen::Ref<const Eigen::VectorXd>& logits, const ExtendedBinaryLabel& target);

// Sigmoid cross-entropy on shared_logit + bias[k]. Groups: {[d shared]};
// bias gradient in d_head.
LossValueAndGrad coral_loss(double shared_logit, const CoralHead& head, const ExtendedBinaryLabel& target);

// Softmax cross-entropy on both examples plus c * [margin - (rj - ri)]_+.
// Groups: {d logits_i, d logits_j, [d ri], [d rj]}.
LossValueAndGrad cnnpor_loss(const Eigen::Ref<const Eigen::VectorXd>& class_logits_i,
                             const Eigen::Ref<const Eigen::VectorXd>& class_logits_j, RankLabel yi, RankLabel yj,
                             double ri, double rj, const CnnporConfig& cfg);

// Softmax cross-entropy on both examples plus c * thor_pair_loss on the
// regression scores. Groups as cnnpor_loss.
LossValueAndGrad hybrid_loss(const Eigen::Ref<const Eigen::VectorXd>& class_logits_i,
                             const Eigen::Ref<const Eigen::VectorXd>& class_logits_j, double fi, double fj,
                             RankLabel i, const Boundaries& b, double c);

}  // namespace thor
