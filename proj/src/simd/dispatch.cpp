#include <cstdlib>
#include <string_view>

#include "qaccel/simd/kernels.hpp"

namespace qaccel::simd {

#ifndef QACCEL_HAVE_AVX2
namespace detail {
const KernelTable* avx2_table_if_compiled() { return nullptr; }
}  // namespace detail
#endif

const KernelTable* avx2_kernels() {
  static const KernelTable* table = []() -> const KernelTable* {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
      return detail::avx2_table_if_compiled();
    }
#endif
    return nullptr;
  }();
  return table;
}

const KernelTable& active_kernels() {
  static const KernelTable& table = []() -> const KernelTable& {
    const char* env = std::getenv("QACCEL_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") {
      return scalar_kernels();
    }
    if (const KernelTable* avx2 = avx2_kernels()) return *avx2;
    return scalar_kernels();
  }();
  return table;
}

}  // namespace qaccel::simd
