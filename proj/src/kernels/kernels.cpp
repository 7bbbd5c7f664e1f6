#include "fbq/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace fbq::kernels {

namespace {

float absmax_2d_scalar(const float* x, std::size_t rows, std::size_t cols, std::size_t ld) {
    float m = 0.0f;
    for (std::size_t r = 0; r < rows; ++r) {
        const float* px = x + r * ld;
        for (std::size_t c = 0; c < cols; ++c) {
            const float v = std::fabs(px[c]);
            if (v > m) m = v;
        }
    }
    return m;
}

void quantize_rtn_2d_scalar(const float* x, std::size_t ldx, std::int16_t* q, std::size_t ldq,
                            std::size_t rows, std::size_t cols, float scale, std::int32_t limit) {
    const double inv = static_cast<double>(scale);
    const double lo = -static_cast<double>(limit);
    const double hi = static_cast<double>(limit);
    for (std::size_t r = 0; r < rows; ++r) {
        const float* px = x + r * ldx;
        std::int16_t* pq = q + r * ldq;
        for (std::size_t c = 0; c < cols; ++c) {
            double t = static_cast<double>(px[c]) / inv;
            t = std::nearbyint(t); // ties to even under the default FP environment
            if (t > hi) t = hi;
            if (t < lo) t = lo;
            pq[c] = static_cast<std::int16_t>(t);
        }
    }
}

void dequantize_2d_scalar(const std::int16_t* q, std::size_t ldq, float* y, std::size_t ldy,
                          std::size_t rows, std::size_t cols, float scale) {
    for (std::size_t r = 0; r < rows; ++r) {
        const std::int16_t* pq = q + r * ldq;
        float* py = y + r * ldy;
        for (std::size_t c = 0; c < cols; ++c) {
            py[c] = static_cast<float>(pq[c]) * scale;
        }
    }
}

void gemm_i16_accum_scalar(const std::int16_t* a, std::size_t lda, const std::int16_t* b,
                           std::size_t ldb, std::int32_t* c, std::size_t ldc, std::size_t m,
                           std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const std::int16_t* pa = a + i * lda;
        std::int32_t* pc = c + i * ldc;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const std::int32_t av = pa[kk];
            const std::int16_t* pb = b + kk * ldb;
            for (std::size_t j = 0; j < n; ++j) {
                pc[j] += av * static_cast<std::int32_t>(pb[j]);
            }
        }
    }
}

void scale_accum_scalar(float* acc, const std::int32_t* p, std::size_t n, float scale) {
    for (std::size_t i = 0; i < n; ++i) {
        const float v = scale * static_cast<float>(p[i]);
        acc[i] = acc[i] + v;
    }
}

constexpr Ops kScalarOps = {
    "scalar",          absmax_2d_scalar,  quantize_rtn_2d_scalar,
    dequantize_2d_scalar, gemm_i16_accum_scalar, scale_accum_scalar,
};

std::atomic<const Ops*> g_active{nullptr};

const Ops* pick_default() {
    const char* env = std::getenv("FBQ_KERNELS");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return &kScalarOps;
        if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return &avx2_ops();
    }
    if (avx2_supported()) return &avx2_ops();
    return &kScalarOps;
}

} // namespace

const Ops& scalar_ops() { return kScalarOps; }

#if !defined(FBQ_HAVE_AVX2_BUILD)
bool avx2_supported() { return false; }
const Ops& avx2_ops() { return kScalarOps; }
#endif

const Ops& active() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (ops == nullptr) {
        ops = pick_default();
        g_active.store(ops, std::memory_order_release);
    }
    return *ops;
}

bool select(const char* name) {
    if (std::strcmp(name, "scalar") == 0) {
        g_active.store(&kScalarOps, std::memory_order_release);
        return true;
    }
    if (std::strcmp(name, "avx2") == 0 && avx2_supported()) {
        g_active.store(&avx2_ops(), std::memory_order_release);
        return true;
    }
    return false;
}

} // namespace fbq::kernels
