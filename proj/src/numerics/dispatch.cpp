#include <cstdlib>
#include <string_view>

#include "sgdlab/numerics/kernels.hpp"

namespace sgdlab::simd {

#if defined(SGDLAB_HAVE_AVX2)
namespace detail {
const KernelTable& avx2_table();
}
#endif

const KernelTable* avx2_kernels() {
#if defined(SGDLAB_HAVE_AVX2)
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    return supported ? &detail::avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() {
    static const KernelTable& table = []() -> const KernelTable& {
        const char* env = std::getenv("LAB_SIMD");
        if (env != nullptr && std::string_view(env) == "scalar") return scalar_kernels();
        if (const KernelTable* fast = avx2_kernels()) return *fast;
        return scalar_kernels();
    }();
    return table;
}

}  // namespace sgdlab::simd
