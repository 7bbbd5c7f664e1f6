#include "fbq/gemm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "fbq/kernels.hpp"

namespace fbq {

namespace {

std::atomic<int> g_threads{1};

// Runs fn(t) for t in [0, tasks) across the configured thread count. Tasks
// must write disjoint state.
void parallel_tasks(index_t tasks, const std::function<void(index_t)>& fn) {
    const int want = g_threads.load(std::memory_order_relaxed);
    const int n = static_cast<int>(std::min<index_t>(tasks, std::max(want, 1)));
    if (n <= 1) {
        for (index_t t = 0; t < tasks; ++t) fn(t);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n);
    std::atomic<index_t> next{0};
    for (int w = 0; w < n; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const index_t t = next.fetch_add(1, std::memory_order_relaxed);
                if (t >= tasks) return;
                fn(t);
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace

void set_gemm_threads(int n) { g_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed); }
int gemm_threads() { return g_threads.load(std::memory_order_relaxed); }

GemmBlockShape::GemmBlockShape(index_t m, index_t n, index_t k) : m_g(m), n_g(n), k_g(k) {
    if (m < 1 || n < 1 || k < 1) throw std::invalid_argument("block sides must be >= 1");
}

TileShape::TileShape(index_t m, index_t n, index_t k) : m_t(m), n_t(n), k_t(k) {
    if (m < 1 || n < 1 || k < 1) throw std::invalid_argument("tile sides must be >= 1");
}

DenseMatrix gemm_oracle(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("gemm_oracle: inner dimensions differ");
    const index_t m = a.rows(), k = a.cols(), n = b.cols();
    std::vector<float> out(static_cast<std::size_t>(m * n));
    parallel_tasks(m, [&](index_t i) {
        std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
        for (index_t kk = 0; kk < k; ++kk) {
            const double av = static_cast<double>(a(i, kk));
            const float* brow = b.row(kk);
            for (index_t j = 0; j < n; ++j) {
                acc[j] += av * static_cast<double>(brow[j]);
            }
        }
        for (index_t j = 0; j < n; ++j) {
            out[i * n + j] = static_cast<float>(acc[j]);
        }
    });
    return DenseMatrix(m, n, std::move(out));
}

namespace {

void check_operands(const QuantizedTensor& qa, const QuantizedTensor& qb,
                    const GemmBlockShape& shape) {
    if (qa.cols != qb.rows) throw std::invalid_argument("block gemm: inner dimensions differ");
    if (qa.geometry != GroupGeometry(shape.m_g, shape.k_g)) {
        throw std::invalid_argument("block gemm: A geometry does not match the block shape");
    }
    if (qb.geometry != GroupGeometry(shape.k_g, shape.n_g)) {
        throw std::invalid_argument("block gemm: B geometry does not match the block shape");
    }
    if (qa.bits.bits > 8 || qb.bits.bits > 8) {
        throw std::invalid_argument("block gemm: operand bit-widths must be <= 8");
    }
    const std::int64_t worst = static_cast<std::int64_t>(shape.k_g) * qa.bits.level() *
                               qb.bits.level();
    if (worst >= (1ll << 31)) {
        throw std::invalid_argument("block gemm: k_g * L_a * L_b overflows the int32 accumulator");
    }
}

// Shared implementation of the three block-GEMM entry points. The float
// accumulation sequence per output element is fixed (ascending k, primary
// then residual) so that the mask==0 and tile==block cases are bit-identical
// to the plain path.
DenseMatrix run_block_gemm(const QuantizedTensor& qa, const QuantizedTensor& qb,
                           const GemmBlockShape& shape, const FallbackTensor* fb,
                           const TileShape* tile) {
    check_operands(qa, qb, shape);
    if (tile != nullptr) {
        if (shape.m_g % tile->m_t || shape.n_g % tile->n_t || shape.k_g % tile->k_t) {
            throw std::invalid_argument("tile sides must divide the block sides");
        }
    }
    const index_t m = qa.rows, k = qa.cols, n = qb.cols;
    const index_t mb = ceil_div(m, shape.m_g);
    const index_t nb = ceil_div(n, shape.n_g);
    const index_t kb = ceil_div(k, shape.k_g);
    if (fb != nullptr &&
        fb->mask.size() != static_cast<std::size_t>(mb * kb)) {
        throw std::invalid_argument("fallback mask does not match the A block grid");
    }

    const kernels::Ops& ops = kernels::active();
    std::vector<float> out(static_cast<std::size_t>(m * n), 0.0f);

    parallel_tasks(mb * nb, [&](index_t task) {
        const index_t bi = task / nb;
        const index_t bj = task % nb;
        const index_t r0 = bi * shape.m_g;
        const index_t c0 = bj * shape.n_g;
        const index_t er = std::min(shape.m_g, m - r0);
        const index_t ec = std::min(shape.n_g, n - c0);
        const std::size_t cells = static_cast<std::size_t>(er * ec);

        std::vector<float> cbuf(cells, 0.0f);
        std::vector<std::int32_t> pbuf(cells);

        for (index_t bk = 0; bk < kb; ++bk) {
            const index_t k0 = bk * shape.k_g;
            const index_t ek = std::min(shape.k_g, k - k0);
            const std::int16_t* a_ptr = qa.codes.data() + r0 * k + k0;
            const std::int16_t* b_ptr = qb.codes.data() + k0 * n + c0;

            std::fill(pbuf.begin(), pbuf.end(), 0);
            if (tile == nullptr) {
                ops.gemm_i16_accum(a_ptr, static_cast<std::size_t>(k), b_ptr,
                                   static_cast<std::size_t>(n), pbuf.data(),
                                   static_cast<std::size_t>(ec), static_cast<std::size_t>(er),
                                   static_cast<std::size_t>(ec), static_cast<std::size_t>(ek));
            } else {
                for (index_t tm = 0; tm < er; tm += tile->m_t) {
                    const index_t etm = std::min(tile->m_t, er - tm);
                    for (index_t tn = 0; tn < ec; tn += tile->n_t) {
                        const index_t etn = std::min(tile->n_t, ec - tn);
                        for (index_t tk = 0; tk < ek; tk += tile->k_t) {
                            const index_t etk = std::min(tile->k_t, ek - tk);
                            ops.gemm_i16_accum(
                                a_ptr + tm * k + tk, static_cast<std::size_t>(k),
                                b_ptr + tk * n + tn, static_cast<std::size_t>(n),
                                pbuf.data() + tm * ec + tn, static_cast<std::size_t>(ec),
                                static_cast<std::size_t>(etm), static_cast<std::size_t>(etn),
                                static_cast<std::size_t>(etk));
                        }
                    }
                }
            }
            const float s = qa.scale_at(bi, bk) * qb.scale_at(bk, bj);
            ops.scale_accum(cbuf.data(), pbuf.data(), cells, s);

            if (fb != nullptr && fb->masked(bi, bk)) {
                const FallbackTensor::Residual& rb = fb->residual_at(bi, bk);
                std::fill(pbuf.begin(), pbuf.end(), 0);
                ops.gemm_i16_accum(rb.codes.data(), static_cast<std::size_t>(ek), b_ptr,
                                   static_cast<std::size_t>(n), pbuf.data(),
                                   static_cast<std::size_t>(ec), static_cast<std::size_t>(er),
                                   static_cast<std::size_t>(ec), static_cast<std::size_t>(ek));
                const float s2 = rb.scale * qb.scale_at(bk, bj);
                ops.scale_accum(cbuf.data(), pbuf.data(), cells, s2);
            }
        }

        for (index_t r = 0; r < er; ++r) {
            for (index_t c = 0; c < ec; ++c) {
                out[(r0 + r) * n + (c0 + c)] = cbuf[r * ec + c];
            }
        }
    });

    return DenseMatrix(m, n, std::move(out));
}

} // namespace

DenseMatrix block_quant_gemm(const QuantizedTensor& qa, const QuantizedTensor& qb,
                             const GemmBlockShape& shape) {
    return run_block_gemm(qa, qb, shape, nullptr, nullptr);
}

DenseMatrix fallback_gemm(const FallbackTensor& fa, const QuantizedTensor& qb,
                          const GemmBlockShape& shape) {
    return run_block_gemm(fa.primary, qb, shape, &fa, nullptr);
}

DenseMatrix tiled_block_gemm(const QuantizedTensor& qa, const QuantizedTensor& qb,
                             const GemmBlockShape& shape, const TileShape& tile) {
    return run_block_gemm(qa, qb, shape, nullptr, &tile);
}

ErrorReport compare(const DenseMatrix& actual, const DenseMatrix& reference) {
    if (actual.rows() != reference.rows() || actual.cols() != reference.cols()) {
        throw std::invalid_argument("compare: dimension mismatch");
    }
    const std::size_t n = static_cast<std::size_t>(actual.size());
    double sq = 0.0, max_err = 0.0, dot = 0.0, na = 0.0, nr = 0.0;
    std::size_t ref_nonzero = 0, underflow = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = actual.data()[i];
        const double r = reference.data()[i];
        const double d = a - r;
        sq += d * d;
        if (std::fabs(d) > max_err) max_err = std::fabs(d);
        dot += a * r;
        na += a * a;
        nr += r * r;
        if (r != 0.0) {
            ++ref_nonzero;
            if (a == 0.0) ++underflow;
        }
    }
    ErrorReport rep;
    rep.rmse = n > 0 ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
    rep.max_abs_err = max_err;
    if (na == 0.0 && nr == 0.0) {
        rep.cosine_similarity = 1.0;
    } else if (na == 0.0 || nr == 0.0) {
        rep.cosine_similarity = 0.0;
    } else {
        rep.cosine_similarity = std::clamp(dot / std::sqrt(na * nr), -1.0, 1.0);
    }
    rep.underflow_fraction =
        ref_nonzero > 0 ? static_cast<double>(underflow) / static_cast<double>(ref_nonzero) : 0.0;
    return rep;
}

} // namespace fbq
