#include <gtest/gtest.h>

#include <cmath>

#include "edn/losses.hpp"
#include "oracles.hpp"

using namespace edn;

namespace {

SaliencyMap constant(std::size_t h, std::size_t w, double v) { return SaliencyMap(h, w, v); }

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

}  // namespace

TEST(Bce, ClosedForms) {
  std::mt19937_64 rng(61);
  const GtMask g = oracle::random_mask(rng, 8, 8);
  EXPECT_NEAR(bce_loss(constant(8, 8, 0.5), g), std::log(2.0), 1e-12);
  EXPECT_LE(bce_loss(to_saliency_map(g), g), 2e-7);
  EXPECT_GE(bce_loss(oracle::random_map(rng, 8, 8), g), 0.0);
  EXPECT_THROW(bce_loss(constant(8, 7, 0.5), g), DimensionError);
}

TEST(Dice, ClosedForms) {
  std::mt19937_64 rng(62);
  const GtMask g = oracle::random_mask(rng, 40, 40, 0.8);
  ASSERT_GE(g.foreground_count(), 1000u);
  EXPECT_LE(dice_loss(to_saliency_map(g), g), 1e-3);
  const GtMask empty(10, 10);
  EXPECT_NEAR(dice_loss(constant(10, 10, 1.0), empty), 1.0 - 1.0 / 101.0, 1e-15);
  const SaliencyMap p = oracle::random_map(rng, 40, 40);
  EXPECT_GE(dice_loss(p, g), 0.0);
  EXPECT_LT(dice_loss(p, g), 1.0);
}

TEST(Loss, MatchesLoopOracle) {
  std::mt19937_64 rng(63);
  for (int i = 0; i < 20; ++i) {
    const SaliencyMap p = oracle::random_map(rng, 8, 8);
    const GtMask g = oracle::random_mask(rng, 8, 8);
    const std::vector<double> pv(p.values().begin(), p.values().end());
    const std::vector<std::uint8_t> gv(g.values().begin(), g.values().end());
    const LossValue v = hybrid_loss(p, g);
    EXPECT_LE(rel(v.total, oracle::hybrid_loss(pv, gv)), 1e-10);
    EXPECT_EQ(v.total, v.bce + v.dice);
    EXPECT_EQ(v.bce, bce_loss(p, g));
    EXPECT_EQ(v.dice, dice_loss(p, g));
  }
}

TEST(Loss, DeepSupervisionSum) {
  std::mt19937_64 rng(64);
  const GtMask g = oracle::random_mask(rng, 6, 6);
  const SaliencyMap perfect = to_saliency_map(g);
  const std::vector<SaliencyMap> same(5, perfect);
  EXPECT_LE(total_deep_supervision_loss(same, g), 5 * (2e-7 + dice_loss(perfect, g)) + 1e-15);

  std::vector<SaliencyMap> preds;
  double expect = 0.0;
  for (int i = 0; i < 5; ++i) {
    preds.push_back(oracle::random_map(rng, 6, 6));
    const std::vector<double> pv(preds.back().values().begin(), preds.back().values().end());
    expect += oracle::hybrid_loss(pv, {g.values().begin(), g.values().end()});
  }
  const double total = total_deep_supervision_loss(preds, g);
  EXPECT_LE(rel(total, expect), 1e-12);
  std::swap(preds[0], preds[4]);
  std::swap(preds[1], preds[3]);
  EXPECT_NEAR(total_deep_supervision_loss(preds, g), total, 1e-12);
  preds.pop_back();
  EXPECT_THROW(total_deep_supervision_loss(preds, g), DimensionError);
}

TEST(LossGrad, BceClosedForm) {
  // One pixel, P = 0.5, G = 1: bce' = -1/P = -2; dice' = -(2*den - (2*inter+1)) / den^2.
  const SaliencyMap p(1, 1, 0.5);
  const GtMask g(1, 1, std::uint8_t{1});
  const double den = 1 + 0.5 + 1, num = 2 * 0.5 + 1;
  const double dice = -(2 * den - num) / (den * den);
  EXPECT_NEAR(loss_grad(p, g)[0], -2.0 + dice, 1e-12);
}

TEST(LossGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(65);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<double> p(36);
    for (double& v : p) v = u(rng);
    const GtMask g = oracle::random_mask(rng, 6, 6, 0.5, false);
    const std::vector<std::uint8_t> gv(g.values().begin(), g.values().end());
    const auto grad = loss_grad(p, gv);
    for (std::size_t i = 0; i < 36; ++i) {
      auto up = p, dn = p;
      up[i] += 1e-4;
      dn[i] -= 1e-4;
      const double fd = (oracle::hybrid_loss(up, gv) - oracle::hybrid_loss(dn, gv)) / 2e-4;
      worst = std::max(worst, std::fabs(grad[i] - fd) / std::max({std::fabs(grad[i]), std::fabs(fd), 1e-12}));
    }
  }
  EXPECT_LE(worst, 1e-4);
  const GradCheckReport r = gradient_check(7);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.instances, 100u);
}

TEST(PolyLr, FormulaAndMonotone) {
  const ScheduleSpec s;
  EXPECT_EQ(poly_lr(s, 0), 5e-5);
  EXPECT_EQ(poly_lr(s, 30), 0.0);
  EXPECT_LE(rel(poly_lr(s, 15), 5e-5 * std::pow(0.5, 0.9)), 1e-12);
  EXPECT_NEAR(poly_lr(s, 15), 2.679e-5, 1e-8);
  for (int n = 0; n < 30; ++n) EXPECT_GE(poly_lr(s, n), poly_lr(s, n + 1));
  EXPECT_THROW(poly_lr(s, -1), DomainError);
  EXPECT_THROW(poly_lr(s, 31), DomainError);
}
