#include "fbq/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fbq/kernels.hpp"

namespace fbq {

std::vector<double> score_blocks(const DenseMatrix& m, const GroupGeometry& g, BitWidth b,
                                 FallbackCriterion c) {
    const index_t gr = grid_rows(m.rows(), g);
    const index_t gc = grid_cols(m.cols(), g);
    std::vector<double> scores(static_cast<std::size_t>(gr * gc), 0.0);

    if (c == FallbackCriterion::AbsMax) {
        for (index_t bi = 0; bi < gr; ++bi) {
            for (index_t bj = 0; bj < gc; ++bj) {
                const BlockView v = block_view(m, g, {bi, bj});
                scores[bi * gc + bj] = kernels::active().absmax_2d(
                    v.data, static_cast<std::size_t>(v.rows), static_cast<std::size_t>(v.cols),
                    static_cast<std::size_t>(v.ld));
            }
        }
        return scores;
    }

    const QuantizedTensor q = quantize_rtn(m, g, b);
    for (index_t bi = 0; bi < gr; ++bi) {
        for (index_t bj = 0; bj < gc; ++bj) {
            const BlockView v = block_view(m, g, {bi, bj});
            const float a = q.scale_at(bi, bj);
            double l1 = 0.0, mass = 0.0;
            for (index_t r = 0; r < v.rows; ++r) {
                for (index_t cc = 0; cc < v.cols; ++cc) {
                    const double x = v(r, cc);
                    const double rec =
                        static_cast<double>(q.codes[(v.row0 + r) * q.cols + (v.col0 + cc)]) *
                        static_cast<double>(a);
                    l1 += std::fabs(x - rec);
                    mass += std::fabs(x);
                }
            }
            if (c == FallbackCriterion::L1) {
                scores[bi * gc + bj] = l1;
            } else {
                scores[bi * gc + bj] = mass > 0.0 ? l1 / mass : 0.0;
            }
        }
    }
    return scores;
}

std::vector<std::uint8_t> mask_topk(const std::vector<double>& scores, double rate) {
    if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("rate must be in [0, 1]");
    const std::size_t n = scores.size();
    std::size_t k = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n)));
    if (k > n) k = n;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (scores[i] != scores[j]) return scores[i] > scores[j];
        return i < j;
    });
    std::vector<std::uint8_t> mask(n, 0);
    for (std::size_t i = 0; i < k; ++i) mask[order[i]] = 1;
    return mask;
}

std::vector<std::uint8_t> mask_threshold(const std::vector<double>& scores, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be > 0");
    std::vector<std::uint8_t> mask(scores.size(), 0);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        mask[i] = scores[i] > threshold ? 1 : 0;
    }
    return mask;
}

double mask_rate(const std::vector<std::uint8_t>& mask) {
    if (mask.empty()) return 0.0;
    std::size_t set = 0;
    for (std::uint8_t b : mask) set += b != 0;
    return static_cast<double>(set) / static_cast<double>(mask.size());
}

ControllerConfig::ControllerConfig(double rmin, double rmax, double a)
    : r_min(rmin), r_max(rmax), alpha(a) {
    if (!(0.0 <= rmin && rmin < rmax && rmax <= 1.0)) {
        throw std::invalid_argument("need 0 <= r_min < r_max <= 1");
    }
    if (!(a > 1.0)) throw std::invalid_argument("alpha must be > 1");
}

FallbackThresholdState controller_update(FallbackThresholdState state, double observed_rate,
                                         const ControllerConfig& cfg) {
    if (observed_rate < 0.0 || observed_rate > 1.0) {
        throw std::invalid_argument("observed rate must be in [0, 1]");
    }
    if (observed_rate < cfg.r_min) {
        state.threshold /= cfg.alpha;
    } else if (observed_rate > cfg.r_max) {
        state.threshold *= cfg.alpha;
    }
    state.last_rate = observed_rate;
    return state;
}

} // namespace fbq
