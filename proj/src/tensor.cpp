#include "edn/tensor.hpp"

#include <algorithm>

#include "edn/simd/kernels.hpp"

namespace edn {

std::string to_string(const Shape4& s) {
  return "(" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.h) + "," +
         std::to_string(s.w) + ")";
}

namespace {

void check_shape(const Shape4& s) {
  if (s.n == 0 || s.c == 0 || s.h == 0 || s.w == 0) {
    throw DimensionError("tensor dims must all be >= 1, got " + to_string(s));
  }
}

}  // namespace

Tensor4::Tensor4(Shape4 shape, float fill) : shape_(shape) {
  check_shape(shape_);
  data_.assign(shape_.size(), fill);
}

Tensor4::Tensor4(Shape4 shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_.size()) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) + " does not match dims " +
                         to_string(shape_));
  }
}

Index4 Tensor4::index(std::size_t off) const noexcept {
  Index4 idx{};
  idx.x = off % shape_.w;
  off /= shape_.w;
  idx.y = off % shape_.h;
  off /= shape_.h;
  idx.c = off % shape_.c;
  idx.n = off / shape_.c;
  return idx;
}

ChannelVector::ChannelVector(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) throw DimensionError("channel vector must have at least one element");
}

Tensor4 elementwise_mul_broadcast(const Tensor4& a, const ChannelVector& v) {
  if (a.c() != v.size()) {
    throw DimensionError("broadcast multiply: tensor has " + std::to_string(a.c()) + " channels, vector has " +
                         std::to_string(v.size()));
  }
  const auto& k = simd::active();
  Tensor4 out(a.shape());
  for (std::size_t n = 0; n < a.n(); ++n) {
    for (std::size_t c = 0; c < a.c(); ++c) {
      k.scale(out.plane(n, c).data(), a.plane(n, c).data(), v[c], a.shape().plane());
    }
  }
  return out;
}

Tensor4 elementwise_mul_broadcast(const Tensor4& a, std::span<const ChannelVector> per_item) {
  if (per_item.size() != a.n()) {
    throw DimensionError("broadcast multiply: " + std::to_string(per_item.size()) + " vectors for batch of " +
                         std::to_string(a.n()));
  }
  const auto& k = simd::active();
  Tensor4 out(a.shape());
  for (std::size_t n = 0; n < a.n(); ++n) {
    const ChannelVector& v = per_item[n];
    if (v.size() != a.c()) {
      throw DimensionError("broadcast multiply: tensor has " + std::to_string(a.c()) + " channels, vector has " +
                           std::to_string(v.size()));
    }
    for (std::size_t c = 0; c < a.c(); ++c) {
      k.scale(out.plane(n, c).data(), a.plane(n, c).data(), v[c], a.shape().plane());
    }
  }
  return out;
}

Tensor4 concat_channels(const Tensor4& a, const Tensor4& b) {
  const Tensor4 parts[] = {a, b};
  return concat_channels(parts);
}

Tensor4 concat_channels(std::span<const Tensor4> parts) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  const Shape4 first = parts.front().shape();
  Shape4 out_shape = first;
  out_shape.c = 0;
  for (const auto& p : parts) {
    const Shape4& s = p.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw DimensionError("concat: " + to_string(s) + " does not match " + to_string(first) +
                           " in batch/spatial dims");
    }
    out_shape.c += s.c;
  }
  Tensor4 out(out_shape);
  auto dst = out.data().begin();
  for (std::size_t n = 0; n < out_shape.n; ++n) {
    for (const auto& p : parts) {
      const std::size_t block = p.c() * p.shape().plane();
      const auto src = p.data().begin() + static_cast<std::ptrdiff_t>(n * block);
      dst = std::copy(src, src + static_cast<std::ptrdiff_t>(block), dst);
    }
  }
  return out;
}

std::vector<Tensor4> split_channels_even(const Tensor4& a, std::size_t parts) {
  if (parts == 0 || a.c() % parts != 0) {
    throw DimensionError("cannot split " + std::to_string(a.c()) + " channels into " + std::to_string(parts) +
                         " equal parts");
  }
  Shape4 part_shape = a.shape();
  part_shape.c = a.c() / parts;
  const std::size_t block = part_shape.c * part_shape.plane();
  std::vector<Tensor4> out;
  out.reserve(parts);
  for (std::size_t p = 0; p < parts; ++p) {
    Tensor4 t(part_shape);
    for (std::size_t n = 0; n < a.n(); ++n) {
      const auto src = a.data().begin() + static_cast<std::ptrdiff_t>(a.offset(n, p * part_shape.c, 0, 0));
      std::copy(src, src + static_cast<std::ptrdiff_t>(block),
                t.data().begin() + static_cast<std::ptrdiff_t>(n * block));
    }
    out.push_back(std::move(t));
  }
  return out;
}

Tensor4 add(const Tensor4& a, const Tensor4& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  Tensor4 out(a.shape());
  simd::active().add(out.data().data(), a.data().data(), b.data().data(), a.size());
  return out;
}

void add_inplace(Tensor4& a, const Tensor4& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  simd::active().add(a.data().data(), a.data().data(), b.data().data(), a.size());
}

Tensor4 scale(const Tensor4& a, float factor) {
  Tensor4 out(a.shape());
  simd::active().scale(out.data().data(), a.data().data(), factor, a.size());
  return out;
}

}  // namespace edn
