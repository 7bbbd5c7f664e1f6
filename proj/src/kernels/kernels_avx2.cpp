// AVX2 backend. Every routine mirrors the scalar reference operation-for-
// operation: IEEE divide/round/convert/mul/add per element, integer sums
// reassociated only. Bit-identity with the scalar backend is enforced by
// tests/test_kernels.cpp.

#include "fbq/kernels.hpp"

#if defined(FBQ_HAVE_AVX2_BUILD)

#include <immintrin.h>

#include <cmath>

namespace fbq::kernels {

namespace {

float absmax_2d_avx2(const float* x, std::size_t rows, std::size_t cols, std::size_t ld) {
    const __m256 sign_mask = _mm256_set1_ps(-0.0f);
    __m256 vmax = _mm256_setzero_ps();
    float m = 0.0f;
    for (std::size_t r = 0; r < rows; ++r) {
        const float* px = x + r * ld;
        std::size_t c = 0;
        for (; c + 8 <= cols; c += 8) {
            const __m256 v = _mm256_andnot_ps(sign_mask, _mm256_loadu_ps(px + c));
            vmax = _mm256_max_ps(vmax, v);
        }
        for (; c < cols; ++c) {
            const float v = std::fabs(px[c]);
            if (v > m) m = v;
        }
    }
    alignas(32) float lanes[8];
    _mm256_store_ps(lanes, vmax);
    for (float v : lanes) {
        if (v > m) m = v;
    }
    return m;
}

void quantize_rtn_2d_avx2(const float* x, std::size_t ldx, std::int16_t* q, std::size_t ldq,
                          std::size_t rows, std::size_t cols, float scale, std::int32_t limit) {
    const __m256d vscale = _mm256_set1_pd(static_cast<double>(scale));
    const __m256d vlo = _mm256_set1_pd(-static_cast<double>(limit));
    const __m256d vhi = _mm256_set1_pd(static_cast<double>(limit));
    const double s = static_cast<double>(scale);
    const double lo = -static_cast<double>(limit);
    const double hi = static_cast<double>(limit);

    for (std::size_t r = 0; r < rows; ++r) {
        const float* px = x + r * ldx;
        std::int16_t* pq = q + r * ldq;
        std::size_t c = 0;
        for (; c + 8 <= cols; c += 8) {
            const __m256 xv = _mm256_loadu_ps(px + c);
            __m256d d0 = _mm256_cvtps_pd(_mm256_castps256_ps128(xv));
            __m256d d1 = _mm256_cvtps_pd(_mm256_extractf128_ps(xv, 1));
            d0 = _mm256_div_pd(d0, vscale);
            d1 = _mm256_div_pd(d1, vscale);
            d0 = _mm256_round_pd(d0, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
            d1 = _mm256_round_pd(d1, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
            d0 = _mm256_min_pd(_mm256_max_pd(d0, vlo), vhi);
            d1 = _mm256_min_pd(_mm256_max_pd(d1, vlo), vhi);
            const __m128i i0 = _mm256_cvtpd_epi32(d0);
            const __m128i i1 = _mm256_cvtpd_epi32(d1);
            _mm_storeu_si128(reinterpret_cast<__m128i*>(pq + c), _mm_packs_epi32(i0, i1));
        }
        for (; c < cols; ++c) {
            double t = static_cast<double>(px[c]) / s;
            t = std::nearbyint(t);
            if (t > hi) t = hi;
            if (t < lo) t = lo;
            pq[c] = static_cast<std::int16_t>(t);
        }
    }
}

void dequantize_2d_avx2(const std::int16_t* q, std::size_t ldq, float* y, std::size_t ldy,
                        std::size_t rows, std::size_t cols, float scale) {
    const __m256 vscale = _mm256_set1_ps(scale);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::int16_t* pq = q + r * ldq;
        float* py = y + r * ldy;
        std::size_t c = 0;
        for (; c + 8 <= cols; c += 8) {
            const __m128i raw = _mm_loadu_si128(reinterpret_cast<const __m128i*>(pq + c));
            const __m256 f = _mm256_cvtepi32_ps(_mm256_cvtepi16_epi32(raw));
            _mm256_storeu_ps(py + c, _mm256_mul_ps(f, vscale));
        }
        for (; c < cols; ++c) {
            py[c] = static_cast<float>(pq[c]) * scale;
        }
    }
}

// Two k-steps per iteration via vpmaddwd: broadcast the (a[kk], a[kk+1]) pair,
// interleave the two B rows, and each int32 lane picks up
// a[kk]*b[kk][j] + a[kk+1]*b[kk+1][j]. Unpack works per 128-bit lane, so the
// accumulators hold columns (0-3, 8-11) and (4-7, 12-15); permute2x128
// restores column order on load/store.
void gemm_i16_accum_avx2(const std::int16_t* a, std::size_t lda, const std::int16_t* b,
                         std::size_t ldb, std::int32_t* c, std::size_t ldc, std::size_t m,
                         std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const std::int16_t* pa = a + i * lda;
        std::int32_t* pc = c + i * ldc;
        std::size_t j = 0;
        for (; j + 16 <= n; j += 16) {
            const __m256i c0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(pc + j));
            const __m256i c1 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(pc + j + 8));
            __m256i acc_a = _mm256_permute2x128_si256(c0, c1, 0x20);
            __m256i acc_b = _mm256_permute2x128_si256(c0, c1, 0x31);
            std::size_t kk = 0;
            for (; kk + 2 <= k; kk += 2) {
                const std::uint32_t pair =
                    static_cast<std::uint16_t>(pa[kk]) |
                    (static_cast<std::uint32_t>(static_cast<std::uint16_t>(pa[kk + 1])) << 16);
                const __m256i av = _mm256_set1_epi32(static_cast<int>(pair));
                const __m256i b0 =
                    _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + kk * ldb + j));
                const __m256i b1 =
                    _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + (kk + 1) * ldb + j));
                acc_a = _mm256_add_epi32(acc_a, _mm256_madd_epi16(av, _mm256_unpacklo_epi16(b0, b1)));
                acc_b = _mm256_add_epi32(acc_b, _mm256_madd_epi16(av, _mm256_unpackhi_epi16(b0, b1)));
            }
            if (kk < k) {
                const std::uint32_t pair = static_cast<std::uint16_t>(pa[kk]);
                const __m256i av = _mm256_set1_epi32(static_cast<int>(pair));
                const __m256i b0 =
                    _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + kk * ldb + j));
                const __m256i zero = _mm256_setzero_si256();
                acc_a = _mm256_add_epi32(acc_a, _mm256_madd_epi16(av, _mm256_unpacklo_epi16(b0, zero)));
                acc_b = _mm256_add_epi32(acc_b, _mm256_madd_epi16(av, _mm256_unpackhi_epi16(b0, zero)));
            }
            const __m256i o0 = _mm256_permute2x128_si256(acc_a, acc_b, 0x20);
            const __m256i o1 = _mm256_permute2x128_si256(acc_a, acc_b, 0x31);
            _mm256_storeu_si256(reinterpret_cast<__m256i*>(pc + j), o0);
            _mm256_storeu_si256(reinterpret_cast<__m256i*>(pc + j + 8), o1);
        }
        for (; j < n; ++j) {
            std::int32_t s = pc[j];
            for (std::size_t kk = 0; kk < k; ++kk) {
                s += static_cast<std::int32_t>(pa[kk]) * static_cast<std::int32_t>(b[kk * ldb + j]);
            }
            pc[j] = s;
        }
    }
}

void scale_accum_avx2(float* acc, const std::int32_t* p, std::size_t n, float scale) {
    const __m256 vscale = _mm256_set1_ps(scale);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256i iv = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + i));
        const __m256 v = _mm256_mul_ps(_mm256_cvtepi32_ps(iv), vscale);
        _mm256_storeu_ps(acc + i, _mm256_add_ps(_mm256_loadu_ps(acc + i), v));
    }
    for (; i < n; ++i) {
        const float v = scale * static_cast<float>(p[i]);
        acc[i] = acc[i] + v;
    }
}

constexpr Ops kAvx2Ops = {
    "avx2",           absmax_2d_avx2,  quantize_rtn_2d_avx2,
    dequantize_2d_avx2, gemm_i16_accum_avx2, scale_accum_avx2,
};

} // namespace

bool avx2_supported() { return __builtin_cpu_supports("avx2") != 0; }

const Ops& avx2_ops() { return kAvx2Ops; }

} // namespace fbq::kernels

#endif // FBQ_HAVE_AVX2_BUILD
