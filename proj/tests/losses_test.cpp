#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "thor/losses.hpp"

namespace thor {
namespace {

const Boundaries kDefault5 = default_boundaries(5);

TEST(ThorPairLoss, MidpointsIncurNothing) {
  const auto l = thor_pair_loss(0.5, 1.5, RankLabel(2), kDefault5);
  EXPECT_EQ(l.value, 0.0);
  EXPECT_EQ(l.d_outputs[0](0), 0.0);
  EXPECT_EQ(l.d_outputs[1](0), 0.0);
}

TEST(ThorPairLoss, InsideMarginTermByTerm) {
  // 0 + [0.5 - 1 + 0.8] + [0.5 + 1 - 1.2] + 0
  const auto l = thor_pair_loss(0.8, 1.2, RankLabel(2), kDefault5);
  EXPECT_NEAR(l.value, 0.6, 1e-15);
  EXPECT_EQ(l.d_outputs[0](0), 1.0);
  EXPECT_EQ(l.d_outputs[1](0), -1.0);
}

TEST(ThorPairLoss, LowerHingeOfFirstClass) {
  const auto l = thor_pair_loss(-2.0, 0.5, RankLabel(1), kDefault5);
  EXPECT_DOUBLE_EQ(l.value, 1.5);
  EXPECT_EQ(l.d_outputs[0](0), -1.0);
  EXPECT_EQ(l.d_outputs[1](0), 0.0);  // fj sits exactly on both of its kinks
}

TEST(ThorPairLoss, TopClassHasNoUpperNeighbour) {
  EXPECT_THROW(thor_pair_loss(0, 0, RankLabel(5), kDefault5), InvalidPair);
  EXPECT_THROW(thor_pair_loss(0, 0, RankLabel(0), kDefault5), InvalidPair);
  EXPECT_THROW(thor_violation_count(0, 0, RankLabel(5), kDefault5), InvalidPair);
}

TEST(ThorViolationCount, Examples) {
  EXPECT_EQ(thor_violation_count(0.5, 1.5, RankLabel(2), kDefault5), 0);
  EXPECT_EQ(thor_violation_count(0.8, 1.2, RankLabel(2), kDefault5), 0);
  EXPECT_EQ(thor_violation_count(-2.0, 2.5, RankLabel(2), kDefault5), 2);
}

struct Tuple {
  double fi, fj;
  RankLabel i;
  Boundaries b;
};

Tuple random_tuple(std::mt19937_64& rng, double gamma, double min_width, double max_width) {
  const int k = 2 + static_cast<int>(rng() % 9);
  std::uniform_real_distribution<double> w(min_width, max_width), s(-3, 3);
  std::vector<double> t{s(rng)};
  for (int c = 0; c < k; ++c) t.push_back(t.back() + w(rng));
  Boundaries b(t, gamma);
  const RankLabel i(1 + static_cast<int>(rng() % static_cast<unsigned>(k - 1)));
  std::uniform_real_distribution<double> f(t.front() - 2, t.back() + 2);
  // Half the draws land inside the margin-shrunk regions so zero loss is common.
  if (rng() % 2 == 0 && 2 * gamma <= min_width) {
    std::uniform_real_distribution<double> u(0, 1);
    const double fi = b.lower(i) + gamma + u(rng) * (b.upper(i) - b.lower(i) - 2 * gamma);
    const RankLabel j(i.value + 1);
    const double fj = b.lower(j) + gamma + u(rng) * (b.upper(j) - b.lower(j) - 2 * gamma);
    return {fi, fj, i, b};
  }
  return {f(rng), f(rng), i, b};
}

TEST(ThorPairLoss, ZeroLossIsSound) {
  std::mt19937_64 rng(1);
  int zeros = 0;
  for (int n = 0; n < 10000; ++n) {
    std::uniform_real_distribution<double> g(0, 0.5);
    const auto t = random_tuple(rng, g(rng), 1.0, 2.0);
    if (thor_pair_loss(t.fi, t.fj, t.i, t.b).value != 0.0) continue;
    ++zeros;
    ASSERT_EQ(thor_violation_count(t.fi, t.fj, t.i, t.b), 0);
    ASSERT_EQ(infer_rank_threshold(t.fi, t.b), t.i);
    ASSERT_EQ(infer_rank_threshold(t.fj, t.b), RankLabel(t.i.value + 1));
  }
  EXPECT_GT(zeros, 1000);
}

TEST(ThorPairLoss, UpperBoundsViolationsAtUnitMargin) {
  std::mt19937_64 rng(2);
  for (int n = 0; n < 10000; ++n) {
    std::uniform_real_distribution<double> g(1.0, 1.5);
    const auto t = random_tuple(rng, g(rng), 3.0, 4.0);
    ASSERT_GE(thor_pair_loss(t.fi, t.fj, t.i, t.b).value, thor_violation_count(t.fi, t.fj, t.i, t.b));
  }
}

TEST(ThorPairLoss, BoundCanFailBelowUnitMargin) {
  // Just below b_{i-1} with gamma = 0.5: one violation, loss 0.51.
  const double fi = -0.01;
  const double fj = 1.5;
  EXPECT_EQ(thor_violation_count(fi, fj, RankLabel(2), kDefault5), 1);
  EXPECT_NEAR(thor_pair_loss(fi, fj, RankLabel(2), kDefault5).value, 0.51, 1e-12);
}

TEST(ThorPairLoss, ConvexInOutputs) {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 5000; ++n) {
    const auto a = random_tuple(rng, 0.5, 1.0, 2.0);
    std::uniform_real_distribution<double> f(a.b[0] - 2, a.b[a.b.k()] + 2);
    const double fi2 = f(rng), fj2 = f(rng);
    const double mid = thor_pair_loss(0.5 * (a.fi + fi2), 0.5 * (a.fj + fj2), a.i, a.b).value;
    const double avg =
        0.5 * (thor_pair_loss(a.fi, a.fj, a.i, a.b).value + thor_pair_loss(fi2, fj2, a.i, a.b).value);
    ASSERT_LE(mid, avg + 1e-12);
  }
}

TEST(ThorPairLoss, SubgradientSignStructure) {
  std::mt19937_64 rng(4);
  for (int n = 0; n < 5000; ++n) {
    const auto t = random_tuple(rng, 0.5, 1.0, 2.0);
    const auto l = thor_pair_loss(t.fi, t.fj, t.i, t.b);
    for (const auto& d : l.d_outputs) {
      const double v = d(0);
      ASSERT_TRUE(v == -1.0 || v == 0.0 || v == 1.0);
    }
    // Lower hinge of x_i strictly decreases as fi grows while active.
    const double lower_before = hinge(t.b.margin() + t.b.lower(t.i) - t.fi);
    const double lower_after = hinge(t.b.margin() + t.b.lower(t.i) - (t.fi + 1e-3));
    if (lower_before > 1e-3) {
      ASSERT_LT(lower_after, lower_before);
    } else {
      ASSERT_LE(lower_after, lower_before);
    }
    const double upper_before = hinge(t.b.margin() - t.b.upper(t.i) + t.fi);
    const double upper_after = hinge(t.b.margin() - t.b.upper(t.i) + (t.fi + 1e-3));
    ASSERT_GE(upper_after, upper_before);
  }
}

TEST(ThorPairLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int n = 0; n < 2000; ++n) {
    const auto t = random_tuple(rng, 0.5, 1.0, 2.0);
    const double g = t.b.margin();
    const RankLabel j(t.i.value + 1);
    const double args[] = {g + t.b.lower(t.i) - t.fi, g - t.b.upper(t.i) + t.fi, g + t.b.lower(j) - t.fj,
                           g - t.b.upper(j) + t.fj};
    if (std::any_of(std::begin(args), std::end(args), [](double a) { return std::abs(a) <= 1e-3; })) continue;
    const auto l = thor_pair_loss(t.fi, t.fj, t.i, t.b);
    const double dfi = oracle::central_difference([&](double v) { return thor_pair_loss(v, t.fj, t.i, t.b).value; }, t.fi);
    const double dfj = oracle::central_difference([&](double v) { return thor_pair_loss(t.fi, v, t.i, t.b).value; }, t.fj);
    ASSERT_LT(oracle::rel_error(l.d_outputs[0](0), dfi), 1e-4);
    ASSERT_LT(oracle::rel_error(l.d_outputs[1](0), dfj), 1e-4);
    ++checked;
  }
  EXPECT_GT(checked, 1500);
}

TEST(OrcnnLoss, ClosedFormAtZeroLogits) {
  const auto l = orcnn_loss(Eigen::VectorXd::Zero(4), encode_extended_binary(RankLabel(3), 5));
  EXPECT_NEAR(l.value, 4 * std::log(2.0), 1e-15);
  EXPECT_EQ(l.d_outputs[0], Eigen::Vector4d(-0.5, -0.5, 0.5, 0.5));
}

TEST(OrcnnLoss, SaturatedCorrectPredictions) {
  const auto l = orcnn_loss(Eigen::Vector4d(50, 50, -50, -50), encode_extended_binary(RankLabel(3), 5));
  EXPECT_LT(l.value, 1e-20);
  EXPECT_GE(l.value, 0.0);
}

TEST(OrcnnLoss, TwoClassesIsLogisticLoss) {
  for (double z : {-3.0, -0.3, 0.0, 0.7, 4.0}) {
    const auto pos = orcnn_loss(Eigen::VectorXd::Constant(1, z), encode_extended_binary(RankLabel(2), 2));
    const auto neg = orcnn_loss(Eigen::VectorXd::Constant(1, z), encode_extended_binary(RankLabel(1), 2));
    EXPECT_NEAR(pos.value, std::log(1 + std::exp(-z)), 1e-14);
    EXPECT_NEAR(neg.value, std::log(1 + std::exp(z)), 1e-14);
  }
}

TEST(OrcnnLoss, LengthMismatch) {
  EXPECT_THROW(orcnn_loss(Eigen::VectorXd::Zero(3), encode_extended_binary(RankLabel(3), 5)), ShapeError);
}

TEST(CoralLoss, ClosedFormAtZero) {
  CoralHead head{0, Eigen::Vector2d::Zero()};
  const auto l = coral_loss(0.0, head, encode_extended_binary(RankLabel(2), 3));
  EXPECT_NEAR(l.value, 2 * std::log(2.0), 1e-15);
  EXPECT_EQ(l.d_outputs[0](0), 0.0);
  EXPECT_EQ(l.d_head, Eigen::Vector2d(-0.5, 0.5));
}

TEST(CoralLoss, SortedBiasesGiveMonotoneDecisions) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0, 3);
  for (int n = 0; n < 10000; ++n) {
    const int k = 2 + static_cast<int>(rng() % 10);
    std::vector<double> b(static_cast<size_t>(k - 1));
    for (auto& v : b) v = g(rng);
    std::sort(b.rbegin(), b.rend());
    const double z = g(rng);
    std::vector<int> d;
    for (double bias : b) d.push_back(sigmoid(z + bias) > 0.5 ? 1 : 0);
    ASSERT_TRUE(is_monotone_decision(d));
    ASSERT_NO_THROW(ExtendedBinaryLabel{d});
  }
}

TEST(CoralLoss, SaturationPredictsTopRank) {
  CoralHead head{0, Eigen::Vector4d(1.0, 0.5, -0.5, -1.0)};
  std::vector<int> d;
  for (Eigen::Index k = 0; k < 4; ++k) d.push_back(sigmoid(50 + head.biases(k)) > 0.5 ? 1 : 0);
  EXPECT_EQ(infer_rank_binary(d), RankLabel(5));
}

TEST(CoralLoss, LengthMismatch) {
  CoralHead head{0, Eigen::Vector3d::Zero()};
  EXPECT_THROW(coral_loss(0.0, head, encode_extended_binary(RankLabel(2), 3)), ShapeError);
}

TEST(CnnporLoss, OrderedPairOutsideMargin) {
  const CnnporConfig cfg;
  const Eigen::VectorXd li = Eigen::VectorXd::Zero(5), lj = Eigen::VectorXd::Zero(5);
  const auto l = cnnpor_loss(li, lj, RankLabel(2), RankLabel(3), 0.2, 0.2 + cfg.pair_margin + 0.1, cfg);
  EXPECT_NEAR(l.value, 2 * std::log(5.0), 1e-14);  // l2 = 0
  EXPECT_EQ(l.d_outputs[2](0), 0.0);
  EXPECT_EQ(l.d_outputs[3](0), 0.0);
}

TEST(CnnporLoss, HingeAtTie) {
  CnnporConfig cfg;
  cfg.c = 2.5;
  const Eigen::VectorXd li = Eigen::VectorXd::Zero(5), lj = Eigen::VectorXd::Zero(5);
  const auto l = cnnpor_loss(li, lj, RankLabel(2), RankLabel(3), 0.4, 0.4, cfg);
  EXPECT_NEAR(l.value, 2 * std::log(5.0) + cfg.c * cfg.pair_margin, 1e-14);
  EXPECT_EQ(l.d_outputs[2](0), cfg.c);
  EXPECT_EQ(l.d_outputs[3](0), -cfg.c);
}

TEST(CnnporLoss, UniformLogitsCrossEntropy) {
  const auto l = cnnpor_loss(Eigen::VectorXd::Constant(5, 0.7), Eigen::VectorXd::Constant(5, -1.2), RankLabel(4),
                             RankLabel(5), 0, 10, CnnporConfig{});
  EXPECT_NEAR(l.value, 2 * std::log(5.0), 1e-14);
}

TEST(CnnporLoss, RejectsNonAdjacentPair) {
  EXPECT_THROW(cnnpor_loss(Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(5), RankLabel(2), RankLabel(4), 0, 1,
                           CnnporConfig{}),
               InvalidPair);
  EXPECT_THROW(cnnpor_loss(Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(5), RankLabel(3), RankLabel(2), 0, 1,
                           CnnporConfig{}),
               InvalidPair);
  EXPECT_THROW(cnnpor_loss(Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(5), RankLabel(1), RankLabel(2), 0, 1,
                           CnnporConfig{-1, 1}),
               InvalidArgument);
}

TEST(HybridLoss, ZeroWeightIsClassificationOnly) {
  const Eigen::VectorXd li = Eigen::Vector<double, 5>(0.3, -1, 2, 0, 0.1);
  const Eigen::VectorXd lj = Eigen::Vector<double, 5>(1, 1, 0, -2, 0.5);
  const auto l = hybrid_loss(li, lj, -3.0, 9.0, RankLabel(2), kDefault5, 0.0);
  const double ce = softmax_cross_entropy(li, RankLabel(2), nullptr) + softmax_cross_entropy(lj, RankLabel(3), nullptr);
  EXPECT_EQ(l.value, ce);
  EXPECT_EQ(l.d_outputs[2](0), 0.0);
  EXPECT_EQ(l.d_outputs[3](0), 0.0);
}

TEST(HybridLoss, JointOptimum) {
  Eigen::VectorXd li = Eigen::VectorXd::Constant(5, -50), lj = Eigen::VectorXd::Constant(5, -50);
  li(1) = 50;
  lj(2) = 50;
  const auto l = hybrid_loss(li, lj, 0.5, 1.5, RankLabel(2), kDefault5, 1.0);
  EXPECT_LT(l.value, 1e-40);
}

TEST(HybridLoss, ComposesCrossEntropyAndThor) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 2);
  for (int n = 0; n < 1000; ++n) {
    Eigen::VectorXd li(5), lj(5);
    for (Eigen::Index c = 0; c < 5; ++c) {
      li(c) = g(rng);
      lj(c) = g(rng);
    }
    const RankLabel i(1 + static_cast<int>(rng() % 4));
    const double fi = g(rng), fj = g(rng);
    const auto h = hybrid_loss(li, lj, fi, fj, i, kDefault5, 1.0);
    // cnnpor with c = 0 isolates l1.
    const auto l1 = cnnpor_loss(li, lj, i, RankLabel(i.value + 1), 0, 0, CnnporConfig{0.0, 1.0});
    const auto th = thor_pair_loss(fi, fj, i, kDefault5);
    ASSERT_NEAR(h.value, l1.value + th.value, 1e-12);
  }
}

TEST(HybridLoss, RejectsWrongWidths) {
  EXPECT_THROW(hybrid_loss(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4), 0, 1, RankLabel(2), kDefault5, 1),
               ShapeError);
  EXPECT_THROW(hybrid_loss(Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(5), 0, 1, RankLabel(5), kDefault5, 1),
               InvalidPair);
}

// Output-level finite differences for the smooth losses.
TEST(Losses, OutputGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0, 1.5);
  for (int n = 0; n < 200; ++n) {
    const int k = 5;
    const RankLabel y(1 + static_cast<int>(rng() % 4));
    Eigen::VectorXd logits(k - 1), li(k), lj(k);
    for (auto* v : {&logits, &li, &lj}) {
      for (Eigen::Index c = 0; c < v->size(); ++c) (*v)(c) = g(rng);
    }
    const auto target = encode_extended_binary(y, k);

    const auto orc = orcnn_loss(logits, target);
    for (Eigen::Index c = 0; c < logits.size(); ++c) {
      const double num = oracle::central_difference(
          [&](double v) {
            Eigen::VectorXd p = logits;
            p(c) = v;
            return orcnn_loss(p, target).value;
          },
          logits(c));
      ASSERT_LT(oracle::rel_error(orc.d_outputs[0](c), num), 1e-4);
    }

    CoralHead head{0, logits};
    const double z = g(rng);
    const auto cor = coral_loss(z, head, target);
    ASSERT_LT(oracle::rel_error(cor.d_outputs[0](0),
                                oracle::central_difference([&](double v) { return coral_loss(v, head, target).value; }, z)),
              1e-4);
    for (Eigen::Index c = 0; c < head.biases.size(); ++c) {
      const double num = oracle::central_difference(
          [&](double v) {
            CoralHead h2 = head;
            h2.biases(c) = v;
            return coral_loss(z, h2, target).value;
          },
          head.biases(c));
      ASSERT_LT(oracle::rel_error(cor.d_head(c), num), 1e-4);
    }

    const double ri = g(rng), rj = g(rng);
    const CnnporConfig cfg;
    if (std::abs(cfg.pair_margin - (rj - ri)) > 1e-3) {
      const RankLabel yj(y.value + 1);
      const auto cp = cnnpor_loss(li, lj, y, yj, ri, rj, cfg);
      for (Eigen::Index c = 0; c < k; ++c) {
        const double num = oracle::central_difference(
            [&](double v) {
              Eigen::VectorXd p = li;
              p(c) = v;
              return cnnpor_loss(p, lj, y, yj, ri, rj, cfg).value;
            },
            li(c));
        ASSERT_LT(oracle::rel_error(cp.d_outputs[0](c), num), 1e-4);
      }
      ASSERT_LT(oracle::rel_error(cp.d_outputs[2](0), oracle::central_difference(
                                                          [&](double v) { return cnnpor_loss(li, lj, y, yj, v, rj, cfg).value; }, ri)),
                1e-4);
      ASSERT_LT(oracle::rel_error(cp.d_outputs[3](0), oracle::central_difference(
                                                          [&](double v) { return cnnpor_loss(li, lj, y, yj, ri, v, cfg).value; }, rj)),
                1e-4);
    }
  }
}

TEST(Method, NamesRoundTrip) {
  for (Method m : kAllMethods) EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_THROW(parse_method("svor"), InvalidArgument);
}

}  // namespace
}  // namespace thor
