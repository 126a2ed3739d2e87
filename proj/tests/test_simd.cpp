#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string_view>
#include <vector>

#include "bbauth/rng.hpp"
#include "bbauth/simd.hpp"

using namespace bbauth;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal(0, 10);
    return v;
}

double magnitude(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i]) * (std::abs(b[i]) + 1) + std::abs(b[i]);
    return s + 1.0;
}

}  // namespace

TEST_CASE("dispatch honours the environment override") {
    const char* env = std::getenv("BBAUTH_SIMD");
    const bool forced = env != nullptr && std::string_view(env) == "scalar";
    if (forced) {
        CHECK(simd::active().isa == simd::Isa::Scalar);
    } else if (simd::avx2_kernels() != nullptr) {
        CHECK(simd::active().isa == simd::Isa::Avx2);
    } else {
        CHECK(simd::active().isa == simd::Isa::Scalar);
    }
    MESSAGE("active kernels: " << simd::active().name);
}

TEST_CASE("scalar kernels match plain loops exactly") {
    const auto& k = simd::scalar_kernels();
    Rng rng(1);
    for (std::size_t n = 0; n < 40; ++n) {
        const auto a = random_vec(rng, n), b = random_vec(rng, n);
        double dot = 0, sq = 0, ad = 0, ss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            dot += a[i] * b[i];
            sq += (a[i] - b[i]) * (a[i] - b[i]);
            ad += std::abs(a[i] - b[i]);
            ss += a[i] * a[i];
        }
        CHECK(k.dot(a.data(), b.data(), n) == doctest::Approx(dot).epsilon(1e-14));
        CHECK(k.squared_distance(a.data(), b.data(), n) == doctest::Approx(sq).epsilon(1e-14));
        CHECK(k.abs_diff_sum(a.data(), b.data(), n) == doctest::Approx(ad).epsilon(1e-14));
        CHECK(k.sum_squares(a.data(), n) == doctest::Approx(ss).epsilon(1e-14));
        auto y = b;
        k.axpy(0.75, a.data(), y.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(b[i] + 0.75 * a[i]).epsilon(1e-15));
    }
}

TEST_CASE("avx2 kernels are equivalent to the scalar reference") {
    const auto* v = simd::avx2_kernels();
    if (v == nullptr) {
        MESSAGE("AVX2 variant unavailable on this host; equivalence not exercised");
        return;
    }
    const auto& s = simd::scalar_kernels();
    Rng rng(2);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = trial < 70 ? static_cast<std::size_t>(trial) : rng.below(1000);
        // unaligned starting offsets
        const std::size_t off = rng.below(4);
        const auto a_full = random_vec(rng, n + off), b_full = random_vec(rng, n + off);
        const double* a = a_full.data() + off;
        const double* b = b_full.data() + off;
        const std::vector<double> av(a, a + n), bv(b, b + n);
        const double tol = 1e-14 * magnitude(av, bv);
        CHECK(std::abs(v->dot(a, b, n) - s.dot(a, b, n)) <= tol);
        CHECK(std::abs(v->squared_distance(a, b, n) - s.squared_distance(a, b, n)) <= tol);
        CHECK(std::abs(v->abs_diff_sum(a, b, n) - s.abs_diff_sum(a, b, n)) <= tol);
        CHECK(std::abs(v->sum_squares(a, n) - s.sum_squares(a, n)) <= tol);
        auto y1 = bv, y2 = bv;
        v->axpy(-1.3, a, y1.data(), n);
        s.axpy(-1.3, a, y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-14 * (std::abs(y2[i]) + std::abs(a[i]) + 1));
    }
}
