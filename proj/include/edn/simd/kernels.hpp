#pragma once

// Runtime-dispatched inner loops.
//
// Every kernel has a portable scalar reference in kernels_scalar.cpp. On x86
// an AVX2+FMA variant is compiled into its own translation unit and selected
// when the CPU reports both features. The EDN_SIMD environment variable
// ("scalar" or "avx2") or set_simd_level() overrides the choice; tests use
// this to run the same operation through both tables.
//
// Within one table every lane of a kernel performs the same arithmetic
// sequence, so results do not depend on where a row starts or ends relative
// to the vector width.

#include <cstddef>
#include <string_view>

namespace edn::simd {

enum class Level { kScalar, kAvx2 };

std::string_view name(Level level) noexcept;

struct KernelTable {
  Level level;
  // y[i] += a * x[i]
  void (*axpy)(float* y, const float* x, float a, std::size_t n);
  // y[i] += a * x[i * stride]
  void (*axpy_strided)(float* y, const float* x, std::size_t stride, float a, std::size_t n);
  // y[r * y_step + i] += a * x[r * x_step + i * x_stride] for r < rows, i < n
  void (*axpy_rows)(float* y, std::size_t y_step, const float* x, std::size_t x_step, std::size_t x_stride,
                    float a, std::size_t rows, std::size_t n);
  // y[i] = x[i] * s
  void (*scale)(float* y, const float* x, float s, std::size_t n);
  // y[i] = x[i] * s + b
  void (*scale_shift)(float* y, const float* x, float s, float b, std::size_t n);
  // y[i] = a[i] + b[i]
  void (*add)(float* y, const float* a, const float* b, std::size_t n);
  // y[i] = max(x[i], 0)
  void (*relu)(float* y, const float* x, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;

// True when the AVX2 table was compiled in and the running CPU supports it.
bool avx2_available() noexcept;

// Throws edn::DomainError when the requested level is unavailable.
const KernelTable& kernels_for(Level level);

// Table used by the library. Thread-safe.
const KernelTable& active() noexcept;
Level active_level() noexcept;
void set_simd_level(Level level);

// Best level the machine supports, honoring EDN_SIMD.
Level detect_level() noexcept;

// Restores the previous level on destruction.
class ScopedLevel {
 public:
  explicit ScopedLevel(Level level) : previous_(active_level()) { set_simd_level(level); }
  ~ScopedLevel() { set_simd_level(previous_); }
  ScopedLevel(const ScopedLevel&) = delete;
  ScopedLevel& operator=(const ScopedLevel&) = delete;

 private:
  Level previous_;
};

namespace detail {
const KernelTable* avx2_kernels() noexcept;
}

}  // namespace edn::simd
