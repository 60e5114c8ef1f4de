#include <algorithm>

#include "edn/simd/kernels.hpp"

namespace edn::simd {
namespace {

void axpy(float* y, const float* x, float a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpy_strided(float* y, const float* x, std::size_t stride, float a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i * stride];
}

void axpy_rows(float* y, std::size_t y_step, const float* x, std::size_t x_step, std::size_t x_stride, float a,
               std::size_t rows, std::size_t n) {
  for (std::size_t r = 0; r < rows; ++r) axpy_strided(y + r * y_step, x + r * x_step, x_stride, a, n);
}

void scale(float* y, const float* x, float s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * s;
}

void scale_shift(float* y, const float* x, float s, float b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * s + b;
}

void add(float* y, const float* a, const float* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void relu(float* y, const float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::max(x[i], 0.0f);
}

constexpr KernelTable kScalar{Level::kScalar, axpy, axpy_strided, axpy_rows, scale, scale_shift, add, relu};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace edn::simd
