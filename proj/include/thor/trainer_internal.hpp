#pragma once

#include <vector>

#include "thor/sampler.hpp"
#include "thor/trainer.hpp"

namespace thor::detail {

// Arguments of every hinge and rectifier evaluated for one pair; used to
// keep finite-difference probes away from kinks.
struct PairKinks {
  std::vector<double> hinge_args;
  std::vector<double> preactivations;
};

// Loss of one pair under the method's objective. Parameter gradients are
// accumulated into `grad` and CORAL bias gradients into `coral_grad` when
// given (unscaled).
double pair_loss_and_grad(const Predictor& p, const OrdinalDataset& ds, const PairSample& pair, const TrainConfig& cfg,
                          GradientBuffer* grad, Eigen::VectorXd* coral_grad, PairKinks* kinks);

Predictor init_predictor(const TrainConfig& cfg, int input_dim, int k);

}  // namespace thor::detail
