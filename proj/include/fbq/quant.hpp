#pragma once

#include <cstdint>
#include <vector>

#include "fbq/matrix.hpp"
#include "fbq/rng.hpp"

namespace fbq {

// Symmetric integer width b in [2, 16]; codes live in [-L, +L], L = 2^(b-1)-1.
struct BitWidth {
    int bits;

    explicit BitWidth(int b);
    std::int32_t level() const { return (1 << (bits - 1)) - 1; }

    bool operator==(const BitWidth&) const = default;
};

// Per-group integer codes plus one float scale per group. Codes are stored as
// int16 regardless of bit-width; scales grid is row-major like the block grid.
struct QuantizedTensor {
    index_t rows = 0;
    index_t cols = 0;
    GroupGeometry geometry{1, 1};
    BitWidth bits{8};
    std::vector<std::int16_t> codes; // rows*cols, row-major
    std::vector<float> scales;       // grid_rows*grid_cols, row-major

    index_t grid_rows() const { return fbq::grid_rows(rows, geometry); }
    index_t grid_cols() const { return fbq::grid_cols(cols, geometry); }

    float scale_at(index_t bi, index_t bj) const { return scales[bi * grid_cols() + bj]; }
    std::int16_t code(index_t r, index_t c) const { return codes[r * cols + c]; }
};

// Two-step representation: primary codes everywhere, plus a quantized residual
// for each masked block. Residual storage is proportional to the masked count.
struct FallbackTensor {
    QuantizedTensor primary;
    std::vector<std::uint8_t> mask; // per block, row-major grid

    struct Residual {
        std::vector<std::int16_t> codes; // block extent, row-major within block
        float scale = 0.0f;
    };
    std::vector<Residual> residuals;
    std::vector<std::int32_t> residual_index; // per block; -1 when unmasked

    bool masked(index_t bi, index_t bj) const {
        return mask[bi * primary.grid_cols() + bj] != 0;
    }
    const Residual& residual_at(index_t bi, index_t bj) const {
        return residuals[residual_index[bi * primary.grid_cols() + bj]];
    }
};

// Round-to-nearest-even per group: scale = absmax/L, codes = clamp(round(x/scale)).
// All-zero groups get scale 0 and zero codes.
QuantizedTensor quantize_rtn(const DenseMatrix& m, const GroupGeometry& g, BitWidth b);

// Unbiased rounding: x/scale rounds up with probability frac(x/scale), driven
// by the rng value at the element's linear index (order-independent).
QuantizedTensor quantize_stochastic(const DenseMatrix& m, const GroupGeometry& g, BitWidth b,
                                    const DeterministicRng& rng);

DenseMatrix dequantize(const QuantizedTensor& q);

QuantizedTensor transpose(const QuantizedTensor& q);

// Primary pass everywhere; for masked blocks a second RTN pass over the
// residual G - dequant(primary).
FallbackTensor fallback_quantize(const DenseMatrix& m, const GroupGeometry& g, BitWidth b,
                                 const std::vector<std::uint8_t>& mask);

DenseMatrix dequantize_fallback(const FallbackTensor& f);

} // namespace fbq
