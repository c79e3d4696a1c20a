#include <cstdlib>
#include <string_view>

#include "gevprice/kernels.hpp"
#include "kernels_internal.hpp"

namespace gevprice::kernels {

const KernelTable* avx2_kernels() noexcept {
#if defined(GEVPRICE_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept {
  static const KernelTable* chosen = [] {
    const KernelTable* simd = avx2_kernels();
    if (const char* env = std::getenv("GEVPRICE_SIMD")) {
      if (std::string_view(env) == "scalar") return &scalar_kernels();
    }
    return simd ? simd : &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace gevprice::kernels
