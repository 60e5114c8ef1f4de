#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "edn/error.hpp"

namespace edn {

struct Shape4 {
  std::size_t n = 1;
  std::size_t c = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  std::size_t size() const noexcept { return n * c * h * w; }
  std::size_t plane() const noexcept { return h * w; }
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

std::string to_string(const Shape4& s);

struct Index4 {
  std::size_t n, c, y, x;
  friend bool operator==(const Index4&, const Index4&) = default;
};

// Dense NCHW float tensor. Every dimension is at least 1 and the storage
// length is always n*c*h*w.
class Tensor4 {
 public:
  Tensor4() : Tensor4(Shape4{}) {}
  explicit Tensor4(Shape4 shape, float fill = 0.0f);
  Tensor4(Shape4 shape, std::vector<float> data);

  static Tensor4 zeros(Shape4 shape) { return Tensor4(shape, 0.0f); }
  static Tensor4 ones(Shape4 shape) { return Tensor4(shape, 1.0f); }

  const Shape4& shape() const noexcept { return shape_; }
  std::size_t n() const noexcept { return shape_.n; }
  std::size_t c() const noexcept { return shape_.c; }
  std::size_t h() const noexcept { return shape_.h; }
  std::size_t w() const noexcept { return shape_.w; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }
  const std::vector<float>& storage() const noexcept { return data_; }

  std::size_t offset(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  Index4 index(std::size_t offset) const noexcept;

  float at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return data_[offset(n, c, y, x)];
  }
  float& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) noexcept {
    return data_[offset(n, c, y, x)];
  }

  // Contiguous (h*w) plane of channel c in batch item n.
  std::span<const float> plane(std::size_t n, std::size_t c) const noexcept {
    return {data_.data() + offset(n, c, 0, 0), shape_.plane()};
  }
  std::span<float> plane(std::size_t n, std::size_t c) noexcept {
    return {data_.data() + offset(n, c, 0, 0), shape_.plane()};
  }

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  Shape4 shape_;
  std::vector<float> data_;
};

// Per-channel vector (global-pooled features, attention weights).
class ChannelVector {
 public:
  ChannelVector() = default;
  explicit ChannelVector(std::vector<float> values);
  ChannelVector(std::size_t c, float fill) : ChannelVector(std::vector<float>(c, fill)) {}

  std::size_t size() const noexcept { return values_.size(); }
  float operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const float> values() const noexcept { return values_; }

  friend bool operator==(const ChannelVector&, const ChannelVector&) = default;

 private:
  std::vector<float> values_;
};

// out[n,c,y,x] = a[n,c,y,x] * v[c]
Tensor4 elementwise_mul_broadcast(const Tensor4& a, const ChannelVector& v);
// Same, with a separate vector for each batch item.
Tensor4 elementwise_mul_broadcast(const Tensor4& a, std::span<const ChannelVector> per_item);

Tensor4 concat_channels(const Tensor4& a, const Tensor4& b);
Tensor4 concat_channels(std::span<const Tensor4> parts);

std::vector<Tensor4> split_channels_even(const Tensor4& a, std::size_t parts);

Tensor4 add(const Tensor4& a, const Tensor4& b);
// a += b
void add_inplace(Tensor4& a, const Tensor4& b);

Tensor4 scale(const Tensor4& a, float factor);

}  // namespace edn
