#include "fbq/quant.hpp"

#include <cmath>
#include <stdexcept>

#include "fbq/kernels.hpp"

namespace fbq {

BitWidth::BitWidth(int b) : bits(b) {
    if (b < 2 || b > 16) throw std::invalid_argument("bit-width must be in [2, 16]");
}

namespace {

QuantizedTensor make_empty(const DenseMatrix& m, const GroupGeometry& g, BitWidth b) {
    QuantizedTensor q;
    q.rows = m.rows();
    q.cols = m.cols();
    q.geometry = g;
    q.bits = b;
    q.codes.assign(static_cast<std::size_t>(m.size()), 0);
    q.scales.assign(static_cast<std::size_t>(q.grid_rows() * q.grid_cols()), 0.0f);
    return q;
}

float block_scale(const BlockView& v, std::int32_t level) {
    const float amax = kernels::active().absmax_2d(
        v.data, static_cast<std::size_t>(v.rows), static_cast<std::size_t>(v.cols),
        static_cast<std::size_t>(v.ld));
    return amax > 0.0f ? amax / static_cast<float>(level) : 0.0f;
}

} // namespace

QuantizedTensor quantize_rtn(const DenseMatrix& m, const GroupGeometry& g, BitWidth b) {
    QuantizedTensor q = make_empty(m, g, b);
    const std::int32_t level = b.level();
    const index_t gr = q.grid_rows(), gc = q.grid_cols();
    for (index_t bi = 0; bi < gr; ++bi) {
        for (index_t bj = 0; bj < gc; ++bj) {
            const BlockView v = block_view(m, g, {bi, bj});
            const float a = block_scale(v, level);
            q.scales[bi * gc + bj] = a;
            if (a == 0.0f) continue; // codes already zero
            kernels::active().quantize_rtn_2d(
                v.data, static_cast<std::size_t>(v.ld),
                q.codes.data() + v.row0 * q.cols + v.col0, static_cast<std::size_t>(q.cols),
                static_cast<std::size_t>(v.rows), static_cast<std::size_t>(v.cols), a, level);
        }
    }
    return q;
}

QuantizedTensor quantize_stochastic(const DenseMatrix& m, const GroupGeometry& g, BitWidth b,
                                    const DeterministicRng& rng) {
    QuantizedTensor q = make_empty(m, g, b);
    const std::int32_t level = b.level();
    const index_t gr = q.grid_rows(), gc = q.grid_cols();
    for (index_t bi = 0; bi < gr; ++bi) {
        for (index_t bj = 0; bj < gc; ++bj) {
            const BlockView v = block_view(m, g, {bi, bj});
            const float a = block_scale(v, level);
            q.scales[bi * gc + bj] = a;
            if (a == 0.0f) continue;
            for (index_t r = 0; r < v.rows; ++r) {
                for (index_t c = 0; c < v.cols; ++c) {
                    const index_t lin = (v.row0 + r) * q.cols + (v.col0 + c);
                    const double t = static_cast<double>(v(r, c)) / static_cast<double>(a);
                    double f = std::floor(t);
                    const double frac = t - f;
                    if (frac > 0.0 &&
                        rng.uniform_at(static_cast<std::uint64_t>(lin)) < frac) {
                        f += 1.0;
                    }
                    if (f > level) f = level;
                    if (f < -level) f = -level;
                    q.codes[lin] = static_cast<std::int16_t>(f);
                }
            }
        }
    }
    return q;
}

DenseMatrix dequantize(const QuantizedTensor& q) {
    std::vector<float> out(static_cast<std::size_t>(q.rows * q.cols), 0.0f);
    const index_t gr = q.grid_rows(), gc = q.grid_cols();
    for (index_t bi = 0; bi < gr; ++bi) {
        for (index_t bj = 0; bj < gc; ++bj) {
            const float a = q.scales[bi * gc + bj];
            const index_t r0 = bi * q.geometry.group_rows;
            const index_t c0 = bj * q.geometry.group_cols;
            const index_t er = std::min(q.geometry.group_rows, q.rows - r0);
            const index_t ec = std::min(q.geometry.group_cols, q.cols - c0);
            if (a == 0.0f) continue; // zero codes dequantize to the zero fill
            kernels::active().dequantize_2d(
                q.codes.data() + r0 * q.cols + c0, static_cast<std::size_t>(q.cols),
                out.data() + r0 * q.cols + c0, static_cast<std::size_t>(q.cols),
                static_cast<std::size_t>(er), static_cast<std::size_t>(ec), a);
        }
    }
    return DenseMatrix(q.rows, q.cols, std::move(out));
}

QuantizedTensor transpose(const QuantizedTensor& q) {
    QuantizedTensor t;
    t.rows = q.cols;
    t.cols = q.rows;
    t.geometry = GroupGeometry(q.geometry.group_cols, q.geometry.group_rows);
    t.bits = q.bits;
    t.codes.resize(q.codes.size());
    for (index_t r = 0; r < q.rows; ++r) {
        for (index_t c = 0; c < q.cols; ++c) {
            t.codes[c * t.cols + r] = q.codes[r * q.cols + c];
        }
    }
    const index_t gr = q.grid_rows(), gc = q.grid_cols();
    t.scales.resize(q.scales.size());
    for (index_t bi = 0; bi < gr; ++bi) {
        for (index_t bj = 0; bj < gc; ++bj) {
            t.scales[bj * gr + bi] = q.scales[bi * gc + bj];
        }
    }
    return t;
}

FallbackTensor fallback_quantize(const DenseMatrix& m, const GroupGeometry& g, BitWidth b,
                                 const std::vector<std::uint8_t>& mask) {
    const index_t gr = grid_rows(m.rows(), g);
    const index_t gc = grid_cols(m.cols(), g);
    if (mask.size() != static_cast<std::size_t>(gr * gc)) {
        throw std::invalid_argument("fallback mask does not match the block grid");
    }

    FallbackTensor f;
    f.primary = quantize_rtn(m, g, b);
    f.mask = mask;
    f.residual_index.assign(mask.size(), -1);

    const std::int32_t level = b.level();
    std::vector<float> res; // residual block scratch
    for (index_t bi = 0; bi < gr; ++bi) {
        for (index_t bj = 0; bj < gc; ++bj) {
            if (!mask[bi * gc + bj]) continue;
            const BlockView v = block_view(m, g, {bi, bj});
            const float a = f.primary.scales[bi * gc + bj];

            res.assign(static_cast<std::size_t>(v.rows * v.cols), 0.0f);
            for (index_t r = 0; r < v.rows; ++r) {
                for (index_t c = 0; c < v.cols; ++c) {
                    const float rec =
                        static_cast<float>(f.primary.codes[(v.row0 + r) * f.primary.cols +
                                                           (v.col0 + c)]) * a;
                    res[r * v.cols + c] = v(r, c) - rec;
                }
            }

            FallbackTensor::Residual rb;
            rb.codes.assign(res.size(), 0);
            const float amax = kernels::active().absmax_2d(
                res.data(), static_cast<std::size_t>(v.rows), static_cast<std::size_t>(v.cols),
                static_cast<std::size_t>(v.cols));
            rb.scale = amax > 0.0f ? amax / static_cast<float>(level) : 0.0f;
            if (rb.scale != 0.0f) {
                kernels::active().quantize_rtn_2d(
                    res.data(), static_cast<std::size_t>(v.cols), rb.codes.data(),
                    static_cast<std::size_t>(v.cols), static_cast<std::size_t>(v.rows),
                    static_cast<std::size_t>(v.cols), rb.scale, level);
            }
            f.residual_index[bi * gc + bj] = static_cast<std::int32_t>(f.residuals.size());
            f.residuals.push_back(std::move(rb));
        }
    }
    return f;
}

DenseMatrix dequantize_fallback(const FallbackTensor& f) {
    DenseMatrix base = dequantize(f.primary);
    if (f.residuals.empty()) return base;

    std::vector<float> out(base.values());
    const QuantizedTensor& p = f.primary;
    const index_t gr = p.grid_rows(), gc = p.grid_cols();
    for (index_t bi = 0; bi < gr; ++bi) {
        for (index_t bj = 0; bj < gc; ++bj) {
            if (!f.masked(bi, bj)) continue;
            const FallbackTensor::Residual& rb = f.residual_at(bi, bj);
            const index_t r0 = bi * p.geometry.group_rows;
            const index_t c0 = bj * p.geometry.group_cols;
            const index_t er = std::min(p.geometry.group_rows, p.rows - r0);
            const index_t ec = std::min(p.geometry.group_cols, p.cols - c0);
            for (index_t r = 0; r < er; ++r) {
                for (index_t c = 0; c < ec; ++c) {
                    out[(r0 + r) * p.cols + (c0 + c)] +=
                        static_cast<float>(rb.codes[r * ec + c]) * rb.scale;
                }
            }
        }
    }
    return DenseMatrix(p.rows, p.cols, std::move(out));
}

} // namespace fbq
