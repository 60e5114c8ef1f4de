#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edn/maps.hpp"

namespace edn {

// BCE clamps predictions to [eps, 1 - eps].
inline constexpr double kBceClamp = 1e-7;
// Added to numerator and denominator of the Dice ratio.
inline constexpr double kDiceSmooth = 1.0;

struct LossValue {
  double bce = 0.0;
  double dice = 0.0;
  double total = 0.0;
};

// -mean(G log P + (1 - G) log(1 - P))
double bce_loss(const SaliencyMap& p, const GtMask& g);
// 1 - (2 sum(G P) + s) / (sum(G) + sum(P) + s)
double dice_loss(const SaliencyMap& p, const GtMask& g);
LossValue hybrid_loss(const SaliencyMap& p, const GtMask& g);

// Sum of the hybrid loss over the five side outputs.
double total_deep_supervision_loss(std::span<const SaliencyMap> predictions, const GtMask& g);

// d(bce + dice)/dP per pixel, row-major.
std::vector<double> loss_grad(const SaliencyMap& p, const GtMask& g);

// Span-level versions; no validation beyond equal lengths.
LossValue hybrid_loss(std::span<const double> p, std::span<const std::uint8_t> g);
std::vector<double> loss_grad(std::span<const double> p, std::span<const std::uint8_t> g);

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t instances = 0;
  bool passed = false;
};

struct GradCheckOptions {
  std::size_t instances = 100;
  std::size_t side = 6;
  double step = 1e-4;
  double tolerance = 1e-4;
};

// Compares loss_grad against central finite differences of hybrid_loss on
// random (P, G) pairs; P is drawn from [0.05, 0.95].
GradCheckReport gradient_check(std::uint64_t seed, const GradCheckOptions& options = {});

struct ScheduleSpec {
  double init_lr = 5e-5;
  double power = 0.9;
  int max_epoch = 30;
};

// init_lr * (1 - n / max_epoch)^power; DomainError unless 0 <= n <= max_epoch.
double poly_lr(const ScheduleSpec& sched, int epoch);

}  // namespace edn
