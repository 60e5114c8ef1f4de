#include "edn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "edn/edt.hpp"

namespace edn {

namespace {

// MATLAB eps; used where the reference evaluation code uses it.
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSsimEps = 1e-12;

void require_foreground(const GtMask& g, const char* op) {
  if (g.foreground_count() == 0) throw UndefinedError(std::string(op) + ": ground truth has no foreground");
}

// Highest threshold index i with i/255 <= v.
std::size_t threshold_level(double v) {
  auto k = static_cast<std::ptrdiff_t>(std::floor(v * 255.0));
  k = std::clamp<std::ptrdiff_t>(k, 0, 255);
  while (k < 255 && threshold_value(static_cast<std::size_t>(k + 1)) <= v) ++k;
  while (k > 0 && threshold_value(static_cast<std::size_t>(k)) > v) --k;
  return static_cast<std::size_t>(k);
}

// Confusion counts for every threshold of the sweep.
struct Sweep {
  std::array<double, kThresholdCount> tp{}, fp{};
  double fg = 0.0, n = 0.0;
};

Sweep sweep(const SaliencyMap& p, const GtMask& g) {
  std::array<double, kThresholdCount> fg_hist{}, bg_hist{};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::size_t k = threshold_level(p[i]);
    (g[i] ? fg_hist : bg_hist)[k] += 1.0;
  }
  Sweep s;
  double tp = 0.0, fp = 0.0;
  for (std::size_t k = kThresholdCount; k-- > 0;) {
    tp += fg_hist[k];
    fp += bg_hist[k];
    s.tp[k] = tp;
    s.fp[k] = fp;
  }
  s.fg = static_cast<double>(g.foreground_count());
  s.n = static_cast<double>(g.size());
  return s;
}

double f_from_counts(double tp, double fp, double fg, double beta2) {
  if (tp + fp == 0.0 || fg == 0.0) return 0.0;
  const double precision = tp / (tp + fp);
  const double recall = tp / fg;
  const double denom = beta2 * precision + recall;
  if (denom == 0.0) return 0.0;
  return (1.0 + beta2) * precision * recall / denom;
}

}  // namespace

double mae(const SaliencyMap& p, const GtMask& g) {
  check_same_dims(p, g, "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - g[i]);
  return acc / static_cast<double>(p.size());
}

double f_beta_at(const SaliencyMap& p, const GtMask& g, double threshold, double beta2) {
  check_same_dims(p, g, "f_beta");
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] >= threshold) (g[i] ? tp : fp) += 1.0;
  }
  return f_from_counts(tp, fp, static_cast<double>(g.foreground_count()), beta2);
}

double f_beta_max(const SaliencyMap& p, const GtMask& g, double beta2) {
  check_same_dims(p, g, "f_beta_max");
  require_foreground(g, "f_beta_max");
  const Sweep s = sweep(p, g);
  double best = 0.0;
  for (std::size_t k = 0; k < kThresholdCount; ++k) best = std::max(best, f_from_counts(s.tp[k], s.fp[k], s.fg, beta2));
  return best;
}

namespace {

// Normalized 7x7 Gaussian, sigma 5.
std::array<double, 49> gaussian_7x7() {
  std::array<double, 49> k{};
  double sum = 0.0;
  for (int y = -3; y <= 3; ++y) {
    for (int x = -3; x <= 3; ++x) {
      const double v = std::exp(-(x * x + y * y) / (2.0 * 25.0));
      k[static_cast<std::size_t>((y + 3) * 7 + (x + 3))] = v;
      sum += v;
    }
  }
  for (double& v : k) v /= sum;
  return k;
}

// Correlation with replicated borders, output the same size as the input.
// Zero padding would dilute the error of foreground pixels at the image edge.
std::vector<double> filter_same(std::span<const double> src, std::size_t h, std::size_t w,
                                const std::array<double, 49>& kern) {
  std::vector<double> out(h * w, 0.0);
  const auto hi = static_cast<std::ptrdiff_t>(h);
  const auto wi = static_cast<std::ptrdiff_t>(w);
  for (std::ptrdiff_t y = 0; y < hi; ++y) {
    for (std::ptrdiff_t x = 0; x < wi; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t dy = -3; dy <= 3; ++dy) {
        const std::ptrdiff_t sy = std::clamp<std::ptrdiff_t>(y + dy, 0, hi - 1);
        for (std::ptrdiff_t dx = -3; dx <= 3; ++dx) {
          const std::ptrdiff_t sx = std::clamp<std::ptrdiff_t>(x + dx, 0, wi - 1);
          acc += kern[static_cast<std::size_t>((dy + 3) * 7 + (dx + 3))] * src[static_cast<std::size_t>(sy * wi + sx)];
        }
      }
      out[static_cast<std::size_t>(y * wi + x)] = acc;
    }
  }
  return out;
}

}  // namespace

// Weighted F-measure:
//   E   = |P - G|
//   Et  = E, with each background pixel taking the error of its nearest fg pixel
//   EA  = gaussian(Et), 7x7, sigma 5, borders replicated
//   Emin = min(E, EA) on fg, E on bg
//   B   = 1 on fg, 2 - exp(ln(0.5) / 5 * dist_to_fg) on bg
//   Ew  = Emin * B
//   R   = 1 - mean(Ew on fg), P = TPw / (TPw + FPw), F = 2 R P / (R + P)
double f_weighted(const SaliencyMap& p, const GtMask& g) {
  check_same_dims(p, g, "f_weighted");
  require_foreground(g, "f_weighted");
  const std::size_t n = p.size();
  const DistanceField to_fg = distance_to_sites(g.values(), g.h(), g.w());

  std::vector<double> err(n), spread(n);
  for (std::size_t i = 0; i < n; ++i) err[i] = std::abs(p[i] - g[i]);
  for (std::size_t i = 0; i < n; ++i) spread[i] = g[i] ? err[i] : err[to_fg.nearest[i]];
  static const auto kernel = gaussian_7x7();
  const std::vector<double> smoothed = filter_same(spread, g.h(), g.w(), kernel);

  const double decay = std::log(0.5) / 5.0;
  double fg_weighted_err = 0.0, bg_weighted_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (g[i]) {
      fg_weighted_err += smoothed[i] < err[i] ? smoothed[i] : err[i];
    } else {
      bg_weighted_err += err[i] * (2.0 - std::exp(decay * to_fg.distance[i]));
    }
  }
  const double fg = static_cast<double>(g.foreground_count());
  const double tpw = fg - fg_weighted_err;
  const double recall = 1.0 - fg_weighted_err / fg;
  const double precision = tpw / (kEps + tpw + bg_weighted_err);
  const double q = 2.0 * recall * precision / (kEps + recall + precision);
  return std::clamp(q, 0.0, 1.0);
}

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// 2 x / (x^2 + 1 + sigma + eps) over the selected values.
double object_score(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const double x = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - x) * (v - x);
  const double sigma = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  return 2.0 * x / (x * x + 1.0 + sigma + kSsimEps);
}

double s_object(const SaliencyMap& p, const GtMask& g, double mu) {
  std::vector<double> fg, bg;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (g[i]) {
      fg.push_back(p[i]);
    } else {
      bg.push_back(1.0 - p[i]);
    }
  }
  return mu * object_score(fg) + (1.0 - mu) * object_score(bg);
}

struct Block {
  std::size_t y0, y1, x0, x1;
  std::size_t area() const { return (y1 - y0) * (x1 - x0); }
};

double block_ssim(const SaliencyMap& p, const GtMask& g, const Block& b) {
  const double n = static_cast<double>(b.area());
  double sx = 0.0, sy = 0.0;
  double pmin = 1.0, pmax = 0.0;
  std::uint8_t gmin = 1, gmax = 0;
  for (std::size_t y = b.y0; y < b.y1; ++y) {
    for (std::size_t x = b.x0; x < b.x1; ++x) {
      sx += p.at(y, x);
      sy += g.at(y, x);
      pmin = std::min(pmin, p.at(y, x));
      pmax = std::max(pmax, p.at(y, x));
      gmin = std::min(gmin, g.at(y, x));
      gmax = std::max(gmax, g.at(y, x));
    }
  }
  // Both blocks constant: similar iff equal.
  if (pmin == pmax && gmin == gmax) return pmin == static_cast<double>(gmin) ? 1.0 : 0.0;
  const double mx = sx / n, my = sy / n;
  double vx = 0.0, vy = 0.0, cxy = 0.0;
  for (std::size_t y = b.y0; y < b.y1; ++y) {
    for (std::size_t x = b.x0; x < b.x1; ++x) {
      const double dx = p.at(y, x) - mx;
      const double dy = g.at(y, x) - my;
      vx += dx * dx;
      vy += dy * dy;
      cxy += dx * dy;
    }
  }
  const double norm = n - 1.0 + kEps;
  vx /= norm;
  vy /= norm;
  cxy /= norm;
  const double num = 4.0 * mx * my * cxy;
  if (num == 0.0) return 0.0;
  return num / ((mx * mx + my * my) * (vx + vy) + kSsimEps);
}

double s_region(const SaliencyMap& p, const GtMask& g) {
  const std::size_t h = g.h(), w = g.w();
  double total = 0.0, sum_x = 0.0, sum_y = 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!g.at(y, x)) continue;
      total += 1.0;
      sum_x += static_cast<double>(x + 1);
      sum_y += static_cast<double>(y + 1);
    }
  }
  // 1-based centroid; the left/top blocks span [0, cx) and [0, cy).
  const auto cx = static_cast<std::size_t>(std::round(sum_x / total));
  const auto cy = static_cast<std::size_t>(std::round(sum_y / total));
  const Block blocks[] = {{0, cy, 0, cx}, {0, cy, cx, w}, {cy, h, 0, cx}, {cy, h, cx, w}};
  const double area = static_cast<double>(h * w);
  double score = 0.0;
  for (const Block& b : blocks) {
    if (b.area() == 0) continue;
    score += static_cast<double>(b.area()) / area * block_ssim(p, g, b);
  }
  return score;
}

}  // namespace

// S = alpha * S_object + (1 - alpha) * S_region, clamped to [0,1].
double s_measure(const SaliencyMap& p, const GtMask& g, double alpha) {
  check_same_dims(p, g, "s_measure");
  const double mu = static_cast<double>(g.foreground_count()) / static_cast<double>(g.size());
  const double mean_p = mean_of(p.values());
  double q;
  if (mu == 0.0) {
    q = 1.0 - mean_p;
  } else if (mu == 1.0) {
    q = mean_p;
  } else {
    q = alpha * s_object(p, g, mu) + (1.0 - alpha) * s_region(p, g);
  }
  return std::clamp(q, 0.0, 1.0);
}

// Enhanced alignment of the binarized prediction against G, per threshold.
// All pixels with the same (G, P_bin) pair share one alignment value, so each
// threshold costs O(1) once the sweep counts exist.
EMeasure e_measure(const SaliencyMap& p, const GtMask& g) {
  check_same_dims(p, g, "e_measure");
  const Sweep s = sweep(p, g);
  const double n = s.n;
  const double mg = s.fg / n;
  EMeasure out;
  double sum = 0.0;
  for (std::size_t k = 0; k < kThresholdCount; ++k) {
    const double tp = s.tp[k], fp = s.fp[k];
    const double fn = s.fg - tp, tn = (n - s.fg) - fp;
    double enhanced;
    if (s.fg == 0.0) {
      enhanced = n - (tp + fp);
    } else if (s.fg == n) {
      enhanced = tp + fp;
    } else {
      const double mp = (tp + fp) / n;
      const auto align = [&](double gv, double pv) {
        const double a = gv - mg, b = pv - mp;
        const double xi = 2.0 * a * b / (a * a + b * b + kEps);
        return (xi + 1.0) * (xi + 1.0) / 4.0;
      };
      enhanced = tp * align(1, 1) + fp * align(0, 1) + fn * align(1, 0) + tn * align(0, 0);
    }
    const double score = enhanced / n;
    out.max = std::max(out.max, score);
    sum += score;
  }
  out.mean = sum / static_cast<double>(kThresholdCount);
  return out;
}

std::size_t RegionPartition::count(Region r) const noexcept {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), r));
}

RegionPartition partition_regions(const GtMask& g) {
  require_foreground(g, "partition_regions");
  RegionPartition part{g.h(), g.w(), std::vector<Region>(g.size(), Region::kBackground), exact_edt(g), 0.0};
  std::vector<double> fg_dist;
  fg_dist.reserve(g.foreground_count());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i]) fg_dist.push_back(part.dist[i]);
  }
  std::sort(fg_dist.begin(), fg_dist.end());
  const auto rank = static_cast<std::size_t>(std::ceil((1.0 - kCenterFraction) * static_cast<double>(fg_dist.size())));
  part.percentile80 = fg_dist[std::max<std::size_t>(rank, 1) - 1];
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g[i]) continue;
    const double d = part.dist[i];
    if (d < kBoundaryDistance) {
      part.labels[i] = Region::kBoundary;
    } else if (d >= part.percentile80) {
      part.labels[i] = Region::kCenter;
    } else {
      part.labels[i] = Region::kOther;
    }
  }
  return part;
}

double region_mae(const SaliencyMap& p, const GtMask& g, const RegionPartition& part, Region region) {
  check_same_dims(p, g, "region_mae");
  if (part.labels.size() != g.size()) throw DimensionError("region_mae: partition does not match mask");
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (part.labels[i] != region) continue;
    acc += std::abs(p[i] - g[i]);
    ++count;
  }
  if (count == 0) throw UndefinedError("region_mae: region is empty");
  return acc / static_cast<double>(count);
}

double relative_improvement(double base, double improved) {
  if (!(base > 0.0)) throw DomainError("relative_improvement: base must be > 0");
  return 100.0 * (base - improved) / base;
}

ImageMetrics evaluate(const SaliencyMap& p, const GtMask& g) {
  ImageMetrics m;
  m.mae = mae(p, g);
  m.f_max = f_beta_max(p, g);
  m.f_weighted = f_weighted(p, g);
  m.s_measure = s_measure(p, g);
  const EMeasure e = e_measure(p, g);
  m.e_max = e.max;
  m.e_mean = e.mean;
  const RegionPartition part = partition_regions(g);
  const auto region = [&](Region r) -> std::optional<double> {
    if (part.count(r) == 0) return std::nullopt;
    return region_mae(p, g, part, r);
  };
  m.region = {region(Region::kCenter), region(Region::kBoundary), region(Region::kOther)};
  return m;
}

namespace {

ImageResult evaluate_item(const EvalItem& item) {
  ImageResult r{item.name, std::nullopt, {}};
  if (item.ground_truth.foreground_count() == 0) {
    r.skip_reason = "empty ground truth";
    return r;
  }
  r.metrics = evaluate(item.prediction, item.ground_truth);
  return r;
}

void accumulate_optional(std::optional<double>& sum, std::size_t& count, const std::optional<double>& v) {
  if (!v) return;
  sum = sum.value_or(0.0) + *v;
  ++count;
}

}  // namespace

MetricsReport evaluate_all(std::span<const EvalItem> items, std::size_t threads) {
  MetricsReport report;
  report.per_image.resize(items.size());
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(items.size(), 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < items.size(); ++i) report.per_image[i] = evaluate_item(items[i]);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < items.size(); i += threads) report.per_image[i] = evaluate_item(items[i]);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Sequential reduction in item order.
  ImageMetrics sum;
  RegionMae region_sum;
  std::size_t nc = 0, nb = 0, no = 0;
  for (const auto& r : report.per_image) {
    if (!r.metrics) continue;
    const ImageMetrics& m = *r.metrics;
    sum.mae += m.mae;
    sum.f_max += m.f_max;
    sum.f_weighted += m.f_weighted;
    sum.s_measure += m.s_measure;
    sum.e_max += m.e_max;
    sum.e_mean += m.e_mean;
    accumulate_optional(region_sum.center, nc, m.region.center);
    accumulate_optional(region_sum.boundary, nb, m.region.boundary);
    accumulate_optional(region_sum.other, no, m.region.other);
    ++report.evaluated;
  }
  if (report.evaluated > 0) {
    const double k = static_cast<double>(report.evaluated);
    report.aggregate = {sum.mae / k,       sum.f_max / k, sum.f_weighted / k, sum.s_measure / k,
                        sum.e_max / k,     sum.e_mean / k, {}};
  }
  if (nc) report.aggregate.region.center = *region_sum.center / static_cast<double>(nc);
  if (nb) report.aggregate.region.boundary = *region_sum.boundary / static_cast<double>(nb);
  if (no) report.aggregate.region.other = *region_sum.other / static_cast<double>(no);
  return report;
}

}  // namespace edn
