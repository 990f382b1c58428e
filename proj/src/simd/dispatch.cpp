#include <atomic>
#include <cstdlib>
#include <string_view>

#include "riskbounds/simd/kernels.hpp"

namespace riskbounds::simd {

#if defined(RISKBOUNDS_WITH_AVX2)
const KernelTable& avx2_kernel_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(RISKBOUNDS_WITH_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* detect() {
  const char* env = std::getenv("RISKBOUNDS_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

bool select_kernels(std::string_view name) {
  if (name == "scalar") {
    active().store(&scalar_kernels(), std::memory_order_release);
    return true;
  }
  if (name == "avx2") {
    if (const KernelTable* t = avx2_kernels()) {
      active().store(t, std::memory_order_release);
      return true;
    }
  }
  return false;
}

}  // namespace riskbounds::simd
