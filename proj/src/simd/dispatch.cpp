#include <cstdlib>
#include <string_view>

#include "bbauth/simd.hpp"
#include "kernels_internal.hpp"

namespace bbauth::simd {

const Kernels& scalar_kernels() { return detail::kScalarKernels; }

const Kernels* avx2_kernels() {
#if defined(BBAUTH_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    return supported ? &detail::kAvx2Kernels : nullptr;
#else
    return nullptr;
#endif
}

const Kernels& active() {
    static const Kernels& chosen = []() -> const Kernels& {
        const char* env = std::getenv("BBAUTH_SIMD");
        if (env != nullptr && std::string_view(env) == "scalar") return scalar_kernels();
        if (const Kernels* k = avx2_kernels()) return *k;
        return scalar_kernels();
    }();
    return chosen;
}

}  // namespace bbauth::simd
