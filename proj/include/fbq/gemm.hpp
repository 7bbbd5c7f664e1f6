#pragma once

#include "fbq/matrix.hpp"
#include "fbq/quant.hpp"

namespace fbq {

// Quantization-block sides for one GEMM. The int32 accumulator must hold a
// full intra-block product: k_g * L_a * L_b < 2^31, checked per call.
struct GemmBlockShape {
    index_t m_g = 128;
    index_t n_g = 128;
    index_t k_g = 128;

    GemmBlockShape() = default;
    GemmBlockShape(index_t m, index_t n, index_t k);
};

// Sub-block sides for the tiled variant; each side must divide the block side.
struct TileShape {
    index_t m_t = 0;
    index_t n_t = 0;
    index_t k_t = 0;

    TileShape() = default;
    TileShape(index_t m, index_t n, index_t k);
};

struct ErrorReport {
    double rmse = 0.0;
    double max_abs_err = 0.0;
    double cosine_similarity = 1.0;
    double underflow_fraction = 0.0;
};

// Ground truth: exact product accumulated in double, rounded to float on output.
DenseMatrix gemm_oracle(const DenseMatrix& a, const DenseMatrix& b);

// Integer block GEMM: per output block, int32 block-products scaled by
// a_A*a_B and accumulated in fp32 in ascending-k order.
DenseMatrix block_quant_gemm(const QuantizedTensor& qa, const QuantizedTensor& qb,
                             const GemmBlockShape& shape);

// Mixed-precision GEMM over a fallback-quantized A: masked blocks contribute
// an extra residual block-product. Degenerates bit-identically to
// block_quant_gemm for an all-false mask.
DenseMatrix fallback_gemm(const FallbackTensor& fa, const QuantizedTensor& qb,
                          const GemmBlockShape& shape);

// Block GEMM with each block-product decomposed into tile-products sharing the
// block's scale factors; bit-identical to block_quant_gemm for any valid tile.
DenseMatrix tiled_block_gemm(const QuantizedTensor& qa, const QuantizedTensor& qb,
                             const GemmBlockShape& shape, const TileShape& tile);

ErrorReport compare(const DenseMatrix& actual, const DenseMatrix& reference);

// Output blocks (and oracle rows) are independent tasks; results are
// bit-identical for any thread count.
void set_gemm_threads(int n);
int gemm_threads();

} // namespace fbq
