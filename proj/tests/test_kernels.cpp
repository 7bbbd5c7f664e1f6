// Scalar vs SIMD backend equivalence. Every backend must produce bit-identical
// outputs for identical inputs; sizes hit the vector widths, their tails, and
// strided panels.

#include "fbq/kernels.hpp"
#include "fbq/rng.hpp"

#include <cstring>
#include <vector>

#include "testing.hpp"

using namespace fbq;
using testing::check;

namespace {

std::vector<float> random_floats(std::size_t n, std::uint64_t seed, float scale) {
    DeterministicRng rng(seed);
    std::vector<float> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = scale * rng.normal_at(i);
    return v;
}

std::vector<std::int16_t> random_codes(std::size_t n, std::uint64_t seed, int limit) {
    DeterministicRng rng(seed);
    std::vector<std::int16_t> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = static_cast<std::int16_t>(
            static_cast<std::int64_t>(rng.bits_at(i) % (2 * limit + 1)) - limit);
    }
    return v;
}

void compare_backends(const kernels::Ops& a, const kernels::Ops& b) {
    const std::size_t sizes[][2] = {{1, 1},  {1, 7},   {3, 8},   {5, 16},  {4, 17},
                                    {2, 31}, {7, 33},  {16, 16}, {13, 129}};

    for (const auto& sz : sizes) {
        const std::size_t rows = sz[0], cols = sz[1];
        const std::size_t ld = cols + 3;
        std::vector<float> x(rows * ld, 0.0f);
        DeterministicRng rng(rows * 1000 + cols);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = 10.0f * rng.normal_at(i);

        check(a.absmax_2d(x.data(), rows, cols, ld) == b.absmax_2d(x.data(), rows, cols, ld),
              "absmax_2d bit-equal");

        const float amax = a.absmax_2d(x.data(), rows, cols, ld);
        const float scale = amax > 0 ? amax / 127.0f : 1.0f;
        std::vector<std::int16_t> qa(rows * cols, 0), qb(rows * cols, 0);
        a.quantize_rtn_2d(x.data(), ld, qa.data(), cols, rows, cols, scale, 127);
        b.quantize_rtn_2d(x.data(), ld, qb.data(), cols, rows, cols, scale, 127);
        check(qa == qb, "quantize_rtn_2d bit-equal");

        std::vector<float> ya(rows * cols, -1.0f), yb(rows * cols, -1.0f);
        a.dequantize_2d(qa.data(), cols, ya.data(), cols, rows, cols, scale);
        b.dequantize_2d(qa.data(), cols, yb.data(), cols, rows, cols, scale);
        check(std::memcmp(ya.data(), yb.data(), ya.size() * sizeof(float)) == 0,
              "dequantize_2d bit-equal");
    }

    // integer block products at shapes around the 16-wide kernel and odd k
    const std::size_t gemms[][3] = {{1, 1, 1},   {2, 16, 2},  {3, 17, 5},  {8, 40, 7},
                                    {5, 15, 4},  {16, 33, 128}, {7, 64, 31}, {12, 128, 9}};
    for (const auto& gz : gemms) {
        const std::size_t m = gz[0], n = gz[1], k = gz[2];
        const std::size_t lda = k + 1, ldb = n + 2, ldc = n + 1;
        const auto av = random_codes(m * lda, 17 * m + n, 127);
        const auto bv = random_codes(k * ldb, 31 * n + k, 127);
        std::vector<std::int32_t> ca(m * ldc), cb(m * ldc);
        DeterministicRng rng(m + n + k);
        for (std::size_t i = 0; i < ca.size(); ++i) {
            ca[i] = static_cast<std::int32_t>(rng.bits_at(i) % 1000) - 500;
        }
        cb = ca;
        a.gemm_i16_accum(av.data(), lda, bv.data(), ldb, ca.data(), ldc, m, n, k);
        b.gemm_i16_accum(av.data(), lda, bv.data(), ldb, cb.data(), ldc, m, n, k);
        check(ca == cb, "gemm_i16_accum bit-equal");

        std::vector<float> fa(m * n), fb(m * n);
        const auto base = random_floats(m * n, 5, 2.0f);
        fa = base;
        fb = base;
        a.scale_accum(fa.data(), ca.data(), m * n, 0.0371f);
        b.scale_accum(fb.data(), ca.data(), m * n, 0.0371f);
        check(std::memcmp(fa.data(), fb.data(), fa.size() * sizeof(float)) == 0,
              "scale_accum bit-equal");
    }
}

void test_gemm_against_reference() {
    // small exhaustive-ish reference check of the scalar kernel itself
    const std::size_t m = 3, n = 5, k = 4;
    const auto a = random_codes(m * k, 1, 127);
    const auto b = random_codes(k * n, 2, 127);
    std::vector<std::int32_t> c(m * n, 0);
    kernels::scalar_ops().gemm_i16_accum(a.data(), k, b.data(), n, c.data(), n, m, n, k);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::int64_t want = 0;
            for (std::size_t kk = 0; kk < k; ++kk) {
                want += static_cast<std::int64_t>(a[i * k + kk]) * b[kk * n + j];
            }
            check(c[i * n + j] == want, "scalar gemm reference value");
        }
    }
}

void test_accumulator_headroom() {
    // worst-case block: all codes at +/-127, k = 128
    const std::size_t k = 128;
    std::vector<std::int16_t> a(k, 127), b(k, 127);
    std::vector<std::int32_t> c(1, 0);
    kernels::active().gemm_i16_accum(a.data(), k, b.data(), 1, c.data(), 1, 1, 1, k);
    check(c[0] == 128 * 127 * 127, "max-magnitude block product exact");
    check(c[0] == 2064512 && c[0] < (1ll << 31), "headroom below int32 limit");
}

} // namespace

int main() {
    testing::section("scalar kernels vs reference", test_gemm_against_reference);
    testing::section("accumulator headroom", test_accumulator_headroom);

    if (kernels::avx2_supported()) {
        testing::section("avx2 equivalence", [] {
            compare_backends(kernels::scalar_ops(), kernels::avx2_ops());
        });
        std::printf("active backend: %s\n", kernels::active().name);
    } else {
        std::printf("avx2 not available; scalar-only run\n");
    }
    return testing::report("test_kernels");
}
