// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "edn/simd/kernels.hpp"

namespace edn::simd {
namespace {

constexpr std::size_t kLanes = 8;

// Tails use std::fma so that every element sees one rounding, same as the
// vector body.
void axpy(float* y, const float* x, float a, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 2 * kLanes <= n; i += 2 * kLanes) {
    __m256 y0 = _mm256_loadu_ps(y + i);
    __m256 y1 = _mm256_loadu_ps(y + i + kLanes);
    y0 = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), y0);
    y1 = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i + kLanes), y1);
    _mm256_storeu_ps(y + i, y0);
    _mm256_storeu_ps(y + i + kLanes, y1);
  }
  for (; i + kLanes <= n; i += kLanes) {
    __m256 y0 = _mm256_loadu_ps(y + i);
    y0 = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), y0);
    _mm256_storeu_ps(y + i, y0);
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void axpy_strided(float* y, const float* x, std::size_t stride, float a, std::size_t n) {
  if (stride == 1) {
    axpy(y, x, a, n);
    return;
  }
  const __m256 va = _mm256_set1_ps(a);
  const int s = static_cast<int>(stride);
  const __m256i idx = _mm256_setr_epi32(0, s, 2 * s, 3 * s, 4 * s, 5 * s, 6 * s, 7 * s);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256 xv = _mm256_i32gather_ps(x + i * stride, idx, 4);
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, xv, _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i * stride], y[i]);
}

// Short rows are common deep in the network, so the tail is a masked vector
// op rather than a scalar loop. Lanes are independent fmas either way.
void axpy_row_masked(float* y, const float* x, __m256 va, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  if (i == n) return;
  alignas(32) static constexpr int kMask[2 * kLanes] = {-1, -1, -1, -1, -1, -1, -1, -1, 0, 0, 0, 0, 0, 0, 0, 0};
  const __m256i m = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(kMask + kLanes - (n - i)));
  const __m256 r = _mm256_fmadd_ps(va, _mm256_maskload_ps(x + i, m), _mm256_maskload_ps(y + i, m));
  _mm256_maskstore_ps(y + i, m, r);
}

void axpy_rows(float* y, std::size_t y_step, const float* x, std::size_t x_step, std::size_t x_stride, float a,
               std::size_t rows, std::size_t n) {
  if (x_stride != 1) {
    for (std::size_t r = 0; r < rows; ++r) axpy_strided(y + r * y_step, x + r * x_step, x_stride, a, n);
    return;
  }
  const __m256 va = _mm256_set1_ps(a);
  for (std::size_t r = 0; r < rows; ++r) axpy_row_masked(y + r * y_step, x + r * x_step, va, n);
}

void scale(float* y, const float* x, float s, std::size_t n) {
  const __m256 vs = _mm256_set1_ps(s);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), vs));
  }
  for (; i < n; ++i) y[i] = x[i] * s;
}

void scale_shift(float* y, const float* x, float s, float b, std::size_t n) {
  const __m256 vs = _mm256_set1_ps(s);
  const __m256 vb = _mm256_set1_ps(b);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(_mm256_loadu_ps(x + i), vs, vb));
  }
  for (; i < n; ++i) y[i] = std::fma(x[i], s, b);
}

void add(float* y, const float* a, const float* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) y[i] = a[i] + b[i];
}

void relu(float* y, const float* x, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
  }
  for (; i < n; ++i) y[i] = std::max(x[i], 0.0f);
}

constexpr KernelTable kAvx2{Level::kAvx2, axpy, axpy_strided, axpy_rows, scale, scale_shift, add, relu};

}  // namespace

namespace detail {
const KernelTable* avx2_kernels() noexcept { return &kAvx2; }
}  // namespace detail

}  // namespace edn::simd
