#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fbq/matrix.hpp"

namespace fbq {

// Synthetic activation spec. Additive mode injects structured and occasional
// outliers into a Gaussian body; glu_mode instead computes silu(x1)*x2 from
// heavy-tailed factors whose selected rows/columns are scaled hot.
struct OutlierSpec {
    index_t rows = 0;
    index_t cols = 0;
    float body_std = 1.0f;
    std::vector<std::pair<index_t, float>> channel_outliers; // (column, magnitude)
    std::vector<std::pair<index_t, float>> token_outliers;   // (row, magnitude)
    double occasional_density = 0.0;
    float occasional_magnitude = 0.0f;
    bool glu_mode = false;
    float glu_tail = 0.5f; // lognormal tail strength of the factors
    std::uint64_t seed = 0;
};

DenseMatrix generate(const OutlierSpec& spec);

// Table-style outlier statistics: top 5% rows/columns by L1 norm, the maxima
// inside each structured set (excluding the other set), the maximum strictly
// outside both, and a sorted-|value| quantile curve.
struct OutlierStats {
    double token_max = 0.0;
    double channel_max = 0.0;
    double others_max = 0.0;
    std::vector<index_t> top_token_rows;
    std::vector<index_t> top_channel_cols;
    std::vector<std::pair<double, double>> sparsity; // (quantile, |value|)
};

OutlierStats analyze(const DenseMatrix& m);

} // namespace fbq
