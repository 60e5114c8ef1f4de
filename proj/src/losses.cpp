#include "edn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace edn {

namespace {

void check_lengths(std::size_t p, std::size_t g) {
  if (p != g || p == 0) {
    throw DimensionError("loss: prediction has " + std::to_string(p) + " pixels, ground truth " + std::to_string(g));
  }
}

double bce_sum(std::span<const double> p, std::span<const std::uint8_t> g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kBceClamp, 1.0 - kBceClamp);
    acc += g[i] ? std::log(q) : std::log(1.0 - q);
  }
  return -acc;
}

struct DiceSums {
  double inter = 0.0;
  double denom = 0.0;
};

DiceSums dice_sums(std::span<const double> p, std::span<const std::uint8_t> g) {
  DiceSums s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s.inter += g[i] * p[i];
    s.denom += g[i] + p[i];
  }
  return s;
}

}  // namespace

LossValue hybrid_loss(std::span<const double> p, std::span<const std::uint8_t> g) {
  check_lengths(p.size(), g.size());
  LossValue v;
  v.bce = bce_sum(p, g) / static_cast<double>(p.size());
  const DiceSums s = dice_sums(p, g);
  v.dice = 1.0 - (2.0 * s.inter + kDiceSmooth) / (s.denom + kDiceSmooth);
  v.total = v.bce + v.dice;
  return v;
}

double bce_loss(const SaliencyMap& p, const GtMask& g) {
  check_same_dims(p, g, "bce_loss");
  return bce_sum(p.values(), g.values()) / static_cast<double>(p.size());
}

double dice_loss(const SaliencyMap& p, const GtMask& g) {
  check_same_dims(p, g, "dice_loss");
  const DiceSums s = dice_sums(p.values(), g.values());
  return 1.0 - (2.0 * s.inter + kDiceSmooth) / (s.denom + kDiceSmooth);
}

LossValue hybrid_loss(const SaliencyMap& p, const GtMask& g) {
  check_same_dims(p, g, "hybrid_loss");
  return hybrid_loss(p.values(), g.values());
}

double total_deep_supervision_loss(std::span<const SaliencyMap> predictions, const GtMask& g) {
  if (predictions.size() != 5) {
    throw DimensionError("deep supervision expects 5 predictions, got " + std::to_string(predictions.size()));
  }
  double total = 0.0;
  for (const auto& p : predictions) total += hybrid_loss(p, g).total;
  return total;
}

std::vector<double> loss_grad(std::span<const double> p, std::span<const std::uint8_t> g) {
  check_lengths(p.size(), g.size());
  const double n = static_cast<double>(p.size());
  const DiceSums s = dice_sums(p, g);
  const double num = 2.0 * s.inter + kDiceSmooth;
  const double den = s.denom + kDiceSmooth;
  std::vector<double> grad(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double gi = g[i];
    const double bce = -(gi / p[i] - (1.0 - gi) / (1.0 - p[i])) / n;
    // quotient rule on -(num / den): d num = 2 g, d den = 1
    const double dice = -(2.0 * gi * den - num) / (den * den);
    grad[i] = bce + dice;
  }
  return grad;
}

std::vector<double> loss_grad(const SaliencyMap& p, const GtMask& g) {
  check_same_dims(p, g, "loss_grad");
  return loss_grad(p.values(), g.values());
}

GradCheckReport gradient_check(std::uint64_t seed, const GradCheckOptions& opt) {
  GradCheckReport report;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> prob(0.05, 0.95);
  std::bernoulli_distribution coin(0.5);
  const std::size_t n = opt.side * opt.side;
  for (std::size_t inst = 0; inst < opt.instances; ++inst) {
    std::vector<double> p(n);
    std::vector<std::uint8_t> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = prob(rng);
      g[i] = coin(rng) ? 1 : 0;
    }
    const auto analytic = loss_grad(p, g);
    for (std::size_t i = 0; i < n; ++i) {
      const double saved = p[i];
      p[i] = saved + opt.step;
      const double up = hybrid_loss(p, g).total;
      p[i] = saved - opt.step;
      const double down = hybrid_loss(p, g).total;
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * opt.step);
      const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-12});
      report.max_relative_error = std::max(report.max_relative_error, std::abs(analytic[i] - numeric) / scale);
    }
    ++report.instances;
  }
  report.passed = report.max_relative_error <= opt.tolerance;
  return report;
}

double poly_lr(const ScheduleSpec& sched, int epoch) {
  if (sched.max_epoch <= 0 || !(sched.init_lr > 0.0)) throw DomainError("poly_lr: invalid schedule");
  if (epoch < 0 || epoch > sched.max_epoch) {
    throw DomainError("poly_lr: epoch " + std::to_string(epoch) + " outside [0, " +
                      std::to_string(sched.max_epoch) + "]");
  }
  return sched.init_lr * std::pow(1.0 - static_cast<double>(epoch) / sched.max_epoch, sched.power);
}

}  // namespace edn
