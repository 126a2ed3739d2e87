#pragma once

#include "bbauth/simd.hpp"

namespace bbauth::simd::detail {

extern const Kernels kScalarKernels;

#if defined(BBAUTH_HAVE_AVX2)
extern const Kernels kAvx2Kernels;
#endif

}  // namespace bbauth::simd::detail
