#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edn/maps.hpp"

namespace edn {

inline constexpr std::size_t kThresholdCount = 256;
inline constexpr double kBeta2 = 0.3;

// Threshold i of the binarization sweep, i / 255. A pixel is positive when
// P >= threshold.
inline double threshold_value(std::size_t i) noexcept { return static_cast<double>(i) / 255.0; }

double mae(const SaliencyMap& p, const GtMask& g);

// F-measure of P binarized at `threshold`; 0 when precision and recall are
// both zero or undefined.
double f_beta_at(const SaliencyMap& p, const GtMask& g, double threshold, double beta2 = kBeta2);
// Maximum over the 256-level sweep. UndefinedError on empty G.
double f_beta_max(const SaliencyMap& p, const GtMask& g, double beta2 = kBeta2);

// Weighted F-measure (beta^2 = 1). UndefinedError on empty G.
double f_weighted(const SaliencyMap& p, const GtMask& g);

double s_measure(const SaliencyMap& p, const GtMask& g, double alpha = 0.5);

struct EMeasure {
  double max = 0.0;
  double mean = 0.0;
};
EMeasure e_measure(const SaliencyMap& p, const GtMask& g);

enum class Region : std::uint8_t { kBackground, kBoundary, kCenter, kOther };

inline constexpr double kBoundaryDistance = 5.0;
inline constexpr double kCenterFraction = 0.2;

struct RegionPartition {
  std::size_t h = 0, w = 0;
  std::vector<Region> labels;
  std::vector<double> dist;   // fg: distance to nearest bg; bg: 0
  double percentile80 = 0.0;  // nearest-rank 80th percentile of fg distances

  std::size_t count(Region r) const noexcept;
};

// boundary = fg with dist < 5; center = fg with dist >= percentile80 that is
// not boundary; other = remaining fg. UndefinedError on empty G.
RegionPartition partition_regions(const GtMask& g);

// Mean |P - G| over the pixels labeled `region`. UndefinedError if none.
double region_mae(const SaliencyMap& p, const GtMask& g, const RegionPartition& part, Region region);

// 100 * (base - improved) / base. DomainError when base <= 0.
double relative_improvement(double base, double improved);

struct RegionMae {
  std::optional<double> center, boundary, other;
};

struct ImageMetrics {
  double mae = 0.0;
  double f_max = 0.0;
  double f_weighted = 0.0;
  double s_measure = 0.0;
  double e_max = 0.0;
  double e_mean = 0.0;
  RegionMae region;
};

ImageMetrics evaluate(const SaliencyMap& p, const GtMask& g);

struct EvalItem {
  std::string name;
  SaliencyMap prediction;
  GtMask ground_truth;
};

struct ImageResult {
  std::string name;
  std::optional<ImageMetrics> metrics;  // empty when skipped
  std::string skip_reason;
};

struct MetricsReport {
  std::vector<ImageResult> per_image;
  ImageMetrics aggregate;  // arithmetic mean over evaluated images
  std::size_t evaluated = 0;
};

// Evaluates every item; items whose ground truth is empty are skipped.
// `threads` > 1 fans the work out; the result is identical to threads == 1.
MetricsReport evaluate_all(std::span<const EvalItem> items, std::size_t threads = 1);

}  // namespace edn
