#pragma once

// Data-parallel inner loops shared by the matchers. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2/FMA variant. The variant
// is picked once at runtime from CPUID; BBAUTH_SIMD=scalar forces the
// reference path.

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

namespace bbauth::simd {

enum class Isa { Scalar, Avx2 };

struct Kernels {
    Isa isa;
    std::string_view name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    double (*abs_diff_sum)(const double* a, const double* b, std::size_t n);
    double (*sum_squares)(const double* a, std::size_t n);
    /// y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const Kernels& scalar_kernels();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const Kernels* avx2_kernels();

const Kernels& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().squared_distance(a.data(), b.data(), a.size());
}

inline double abs_diff_sum(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().abs_diff_sum(a.data(), b.data(), a.size());
}

inline double sum_squares(std::span<const double> a) {
    return active().sum_squares(a.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace bbauth::simd
