#include <atomic>
#include <cstdlib>
#include <string>

#include "edn/error.hpp"
#include "edn/simd/kernels.hpp"

namespace edn::simd {

#ifndef EDN_HAVE_AVX2
namespace detail {
const KernelTable* avx2_kernels() noexcept { return nullptr; }
}  // namespace detail
#endif

std::string_view name(Level level) noexcept {
  switch (level) {
    case Level::kScalar:
      return "scalar";
    case Level::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool avx2_available() noexcept {
#if defined(EDN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok && detail::avx2_kernels() != nullptr;
#else
  return false;
#endif
}

const KernelTable& kernels_for(Level level) {
  switch (level) {
    case Level::kScalar:
      return scalar_kernels();
    case Level::kAvx2:
      if (!avx2_available()) throw DomainError("avx2 kernels are not available on this machine");
      return *detail::avx2_kernels();
  }
  throw DomainError("unknown simd level");
}

Level detect_level() noexcept {
  if (const char* env = std::getenv("EDN_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Level::kScalar;
    if (want == "avx2" && avx2_available()) return Level::kAvx2;
  }
  return avx2_available() ? Level::kAvx2 : Level::kScalar;
}

namespace {

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> table{&kernels_for(detect_level())};
  return table;
}

}  // namespace

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

Level active_level() noexcept { return active().level; }

void set_simd_level(Level level) { slot().store(&kernels_for(level), std::memory_order_release); }

}  // namespace edn::simd
