#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edn/tensor.hpp"

namespace edn {

// Single-channel real map with values in [0,1], row-major.
class SaliencyMap {
 public:
  SaliencyMap() = default;
  SaliencyMap(std::size_t h, std::size_t w, double fill = 0.0);
  // Throws DomainError if a value is outside [0,1] or not finite.
  SaliencyMap(std::size_t h, std::size_t w, std::vector<double> values);

  std::size_t h() const noexcept { return h_; }
  std::size_t w() const noexcept { return w_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double at(std::size_t y, std::size_t x) const noexcept { return values_[y * w_ + x]; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const SaliencyMap&, const SaliencyMap&) = default;

 private:
  std::size_t h_ = 0, w_ = 0;
  std::vector<double> values_;
};

// Binary ground-truth mask, row-major, values in {0,1}.
class GtMask {
 public:
  GtMask() = default;
  GtMask(std::size_t h, std::size_t w, std::uint8_t fill = 0);
  // Throws DomainError on values other than 0 or 1.
  GtMask(std::size_t h, std::size_t w, std::vector<std::uint8_t> values);

  std::size_t h() const noexcept { return h_; }
  std::size_t w() const noexcept { return w_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::uint8_t operator[](std::size_t i) const noexcept { return values_[i]; }
  std::uint8_t at(std::size_t y, std::size_t x) const noexcept { return values_[y * w_ + x]; }
  std::span<const std::uint8_t> values() const noexcept { return values_; }
  std::size_t foreground_count() const noexcept;

  friend bool operator==(const GtMask&, const GtMask&) = default;

 private:
  std::size_t h_ = 0, w_ = 0;
  std::vector<std::uint8_t> values_;
};

// Channel `c` of batch item `n`, as doubles.
SaliencyMap to_saliency_map(const Tensor4& t, std::size_t n = 0, std::size_t c = 0);
SaliencyMap to_saliency_map(const GtMask& g);

// Throws DimensionError when the two maps differ in size.
void check_same_dims(const SaliencyMap& p, const GtMask& g, const char* op);

}  // namespace edn
