#include <cstdlib>
#include <string>

#include "sslab/simd/kernels.hpp"

namespace sslab::simd {

const KernelTable* avx2_kernels_unchecked();

std::string_view to_string(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* avx2_kernels() { return cpu_has_avx2() ? avx2_kernels_unchecked() : nullptr; }

const KernelTable& active_kernels() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("SSLAB_SIMD");
    const std::string pref = env ? env : "";
    if (pref == "scalar") return &scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return t;
    return &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace sslab::simd
