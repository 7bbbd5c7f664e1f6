#pragma once

#include <cstdint>
#include <vector>

#include "fbq/matrix.hpp"
#include "fbq/quant.hpp"

namespace fbq {

// Block-scoring rules for fallback selection. AbsMax and L1 are
// scale-covariant; L1Rel is scale-invariant.
enum class FallbackCriterion { AbsMax, L1, L1Rel };

// Per-block scores, row-major over the block grid. AbsMax: block max-abs.
// L1: sum |G - Q(G)| of the RTN quantization at width b. L1Rel: L1 / sum|G|
// (all-zero blocks score 0).
std::vector<double> score_blocks(const DenseMatrix& m, const GroupGeometry& g, BitWidth b,
                                 FallbackCriterion c);

// Exactly ceil(rate * count) highest-scoring blocks; ties go to the lower
// linear block index.
std::vector<std::uint8_t> mask_topk(const std::vector<double>& scores, double rate);

// True exactly where score > threshold (strict).
std::vector<std::uint8_t> mask_threshold(const std::vector<double>& scores, double threshold);

double mask_rate(const std::vector<std::uint8_t>& mask);

struct FallbackThresholdState {
    double threshold = 1.0;
    double last_rate = 0.0;
};

struct ControllerConfig {
    double r_min = 0.1;
    double r_max = 0.3;
    double alpha = 1.3;

    ControllerConfig() = default;
    ControllerConfig(double rmin, double rmax, double a);
};

// Delay-threshold update: divide by alpha below r_min, multiply above r_max,
// otherwise leave the threshold alone.
FallbackThresholdState controller_update(FallbackThresholdState state, double observed_rate,
                                         const ControllerConfig& cfg);

} // namespace fbq
