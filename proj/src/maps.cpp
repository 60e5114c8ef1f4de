#include "edn/maps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace edn {

SaliencyMap::SaliencyMap(std::size_t h, std::size_t w, double fill)
    : SaliencyMap(h, w, std::vector<double>(h * w, fill)) {}

SaliencyMap::SaliencyMap(std::size_t h, std::size_t w, std::vector<double> values)
    : h_(h), w_(w), values_(std::move(values)) {
  if (h_ == 0 || w_ == 0) throw DimensionError("saliency map dims must be >= 1");
  if (values_.size() != h_ * w_) throw DimensionError("saliency map length does not match dims");
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("saliency value " + std::to_string(v) + " outside [0,1]");
  }
}

GtMask::GtMask(std::size_t h, std::size_t w, std::uint8_t fill)
    : GtMask(h, w, std::vector<std::uint8_t>(h * w, fill)) {}

GtMask::GtMask(std::size_t h, std::size_t w, std::vector<std::uint8_t> values)
    : h_(h), w_(w), values_(std::move(values)) {
  if (h_ == 0 || w_ == 0) throw DimensionError("mask dims must be >= 1");
  if (values_.size() != h_ * w_) throw DimensionError("mask length does not match dims");
  if (std::any_of(values_.begin(), values_.end(), [](std::uint8_t v) { return v > 1; })) {
    throw DomainError("mask values must be 0 or 1");
  }
}

std::size_t GtMask::foreground_count() const noexcept {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

SaliencyMap to_saliency_map(const Tensor4& t, std::size_t n, std::size_t c) {
  if (n >= t.n() || c >= t.c()) throw DimensionError("to_saliency_map: plane index out of range");
  const auto plane = t.plane(n, c);
  return SaliencyMap(t.h(), t.w(), std::vector<double>(plane.begin(), plane.end()));
}

SaliencyMap to_saliency_map(const GtMask& g) {
  return SaliencyMap(g.h(), g.w(), std::vector<double>(g.values().begin(), g.values().end()));
}

void check_same_dims(const SaliencyMap& p, const GtMask& g, const char* op) {
  if (p.h() != g.h() || p.w() != g.w()) {
    throw DimensionError(std::string(op) + ": prediction " + std::to_string(p.h()) + "x" + std::to_string(p.w()) +
                         " vs ground truth " + std::to_string(g.h()) + "x" + std::to_string(g.w()));
  }
}

}  // namespace edn
