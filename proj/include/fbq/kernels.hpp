#pragma once

#include <cstddef>
#include <cstdint>

namespace fbq::kernels {

// Data-parallel inner loops used by the quantization and GEMM paths. The
// scalar backend is the reference; every other backend must produce
// bit-identical results for identical inputs (see tests/test_kernels.cpp).
//
// All float operations are plain IEEE div/mul/add/round per element -- no FMA,
// no reassociation of float sums. Integer sums may be reassociated freely.
struct Ops {
    const char* name;

    // max |x| over a rows x cols panel with row stride ld
    float (*absmax_2d)(const float* x, std::size_t rows, std::size_t cols, std::size_t ld);

    // q = clamp(round_half_even(x / scale), -limit, +limit); the divide and
    // round happen in double precision. scale > 0.
    void (*quantize_rtn_2d)(const float* x, std::size_t ldx, std::int16_t* q, std::size_t ldq,
                            std::size_t rows, std::size_t cols, float scale, std::int32_t limit);

    // y = float(q) * scale
    void (*dequantize_2d)(const std::int16_t* q, std::size_t ldq, float* y, std::size_t ldy,
                          std::size_t rows, std::size_t cols, float scale);

    // c += a * b with int32 accumulation; a is m x k (stride lda), b is k x n
    // (stride ldb), c is m x n (stride ldc). Caller guarantees no overflow
    // (k * max|a| * max|b| < 2^31).
    void (*gemm_i16_accum)(const std::int16_t* a, std::size_t lda, const std::int16_t* b,
                           std::size_t ldb, std::int32_t* c, std::size_t ldc, std::size_t m,
                           std::size_t n, std::size_t k);

    // acc[i] += scale * float(p[i])
    void (*scale_accum)(float* acc, const std::int32_t* p, std::size_t n, float scale);
};

const Ops& scalar_ops();

bool avx2_supported(); // compiled in and the CPU reports AVX2
const Ops& avx2_ops(); // only valid when avx2_supported()

// Runtime-selected backend. First use honors FBQ_KERNELS=scalar|avx2 from the
// environment; select() overrides afterwards (returns false if unavailable).
const Ops& active();
bool select(const char* name);

} // namespace fbq::kernels
