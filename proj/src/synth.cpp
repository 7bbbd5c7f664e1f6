#include "fbq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "fbq/rng.hpp"

namespace fbq {

namespace {

float silu(float x) {
    return static_cast<float>(static_cast<double>(x) /
                              (1.0 + std::exp(-static_cast<double>(x))));
}

void validate(const OutlierSpec& spec) {
    if (spec.rows < 1 || spec.cols < 1) throw std::invalid_argument("empty generator extent");
    for (const auto& [col, mag] : spec.channel_outliers) {
        if (col < 0 || col >= spec.cols) throw std::invalid_argument("channel index out of range");
        if (mag < 0.0f) throw std::invalid_argument("negative outlier magnitude");
    }
    for (const auto& [row, mag] : spec.token_outliers) {
        if (row < 0 || row >= spec.rows) throw std::invalid_argument("token index out of range");
        if (mag < 0.0f) throw std::invalid_argument("negative outlier magnitude");
    }
    if (spec.occasional_density < 0.0 || spec.occasional_density > 1.0) {
        throw std::invalid_argument("occasional density must be in [0, 1]");
    }
    if (spec.occasional_magnitude < 0.0f) throw std::invalid_argument("negative outlier magnitude");
}

DenseMatrix generate_additive(const OutlierSpec& spec) {
    const index_t rows = spec.rows, cols = spec.cols;
    std::vector<float> data(static_cast<std::size_t>(rows * cols), 0.0f);

    const DeterministicRng body(derive_seed(spec.seed, 1));
    const DeterministicRng sign(derive_seed(spec.seed, 2));
    DeterministicRng occ(derive_seed(spec.seed, 3));

    if (spec.body_std > 0.0f) {
        for (index_t i = 0; i < rows * cols; ++i) {
            data[i] = spec.body_std * body.normal_at(static_cast<std::uint64_t>(i));
        }
    }

    std::vector<std::uint8_t> row_hot(static_cast<std::size_t>(rows), 0);
    std::vector<std::uint8_t> col_hot(static_cast<std::size_t>(cols), 0);

    // tokens first, channels override the crossings
    for (const auto& [row, mag] : spec.token_outliers) {
        row_hot[row] = 1;
        for (index_t c = 0; c < cols; ++c) {
            const index_t lin = row * cols + c;
            const float s = (sign.bits_at(static_cast<std::uint64_t>(lin)) & 1) ? 1.0f : -1.0f;
            data[lin] = s * mag;
        }
    }
    for (const auto& [col, mag] : spec.channel_outliers) {
        col_hot[col] = 1;
        for (index_t r = 0; r < rows; ++r) {
            const index_t lin = r * cols + col;
            const float s = (sign.bits_at(static_cast<std::uint64_t>(lin)) & 1) ? 1.0f : -1.0f;
            data[lin] = s * mag;
        }
    }

    if (spec.occasional_density > 0.0 && spec.occasional_magnitude > 0.0f) {
        const long long want = std::llround(spec.occasional_density *
                                            static_cast<double>(rows) *
                                            static_cast<double>(cols));
        index_t free_rows = 0, free_cols = 0;
        for (auto h : row_hot) free_rows += h == 0;
        for (auto h : col_hot) free_cols += h == 0;
        if (static_cast<long long>(free_rows) * free_cols < want) {
            throw std::invalid_argument("not enough unstructured cells for occasional outliers");
        }
        std::unordered_set<std::uint64_t> taken;
        long long placed = 0;
        while (placed < want) {
            const std::uint64_t r = occ.next_bits() % static_cast<std::uint64_t>(rows);
            const std::uint64_t c = occ.next_bits() % static_cast<std::uint64_t>(cols);
            if (row_hot[r] || col_hot[c]) continue;
            const std::uint64_t key = r * static_cast<std::uint64_t>(cols) + c;
            if (!taken.insert(key).second) continue;
            const float s = (occ.next_bits() & 1) ? 1.0f : -1.0f;
            data[key] = s * spec.occasional_magnitude;
            ++placed;
        }
    }
    return DenseMatrix(rows, cols, std::move(data));
}

DenseMatrix generate_glu(const OutlierSpec& spec) {
    const index_t rows = spec.rows, cols = spec.cols;
    const DeterministicRng g1(derive_seed(spec.seed, 4));
    const DeterministicRng g2(derive_seed(spec.seed, 5));
    const DeterministicRng t1(derive_seed(spec.seed, 6));
    const DeterministicRng t2(derive_seed(spec.seed, 7));

    std::vector<float> row_gain(static_cast<std::size_t>(rows), 1.0f);
    std::vector<float> col_gain(static_cast<std::size_t>(cols), 1.0f);
    // sqrt of the target magnitude on both factors, so the product lands on it
    for (const auto& [row, mag] : spec.token_outliers) {
        row_gain[row] = std::sqrt(std::max(mag, 1.0f));
    }
    for (const auto& [col, mag] : spec.channel_outliers) {
        col_gain[col] = std::sqrt(std::max(mag, 1.0f));
    }

    const double tail = spec.glu_tail;
    std::vector<float> data(static_cast<std::size_t>(rows * cols));
    for (index_t r = 0; r < rows; ++r) {
        for (index_t c = 0; c < cols; ++c) {
            const std::uint64_t lin = static_cast<std::uint64_t>(r * cols + c);
            const float gain = row_gain[r] * col_gain[c];
            const float x1 = spec.body_std * gain * g1.normal_at(lin) *
                             static_cast<float>(std::exp(tail * t1.normal_at(lin)));
            const float x2 = spec.body_std * gain * g2.normal_at(lin) *
                             static_cast<float>(std::exp(tail * t2.normal_at(lin)));
            data[lin] = silu(x1) * x2;
        }
    }
    return DenseMatrix(rows, cols, std::move(data));
}

} // namespace

DenseMatrix generate(const OutlierSpec& spec) {
    validate(spec);
    return spec.glu_mode ? generate_glu(spec) : generate_additive(spec);
}

OutlierStats analyze(const DenseMatrix& m) {
    if (m.size() == 0) throw std::invalid_argument("analyze: empty matrix");
    const index_t rows = m.rows(), cols = m.cols();

    std::vector<double> row_l1(static_cast<std::size_t>(rows), 0.0);
    std::vector<double> col_l1(static_cast<std::size_t>(cols), 0.0);
    for (index_t r = 0; r < rows; ++r) {
        for (index_t c = 0; c < cols; ++c) {
            const double v = std::fabs(m(r, c));
            row_l1[r] += v;
            col_l1[c] += v;
        }
    }

    auto top_set = [](const std::vector<double>& l1) {
        const std::size_t k =
            static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(l1.size())));
        std::vector<index_t> order(l1.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](index_t a, index_t b) {
            if (l1[a] != l1[b]) return l1[a] > l1[b];
            return a < b;
        });
        order.resize(std::max<std::size_t>(k, 1));
        std::sort(order.begin(), order.end());
        return order;
    };

    OutlierStats st;
    st.top_token_rows = top_set(row_l1);
    st.top_channel_cols = top_set(col_l1);

    std::vector<std::uint8_t> row_top(static_cast<std::size_t>(rows), 0);
    std::vector<std::uint8_t> col_top(static_cast<std::size_t>(cols), 0);
    for (index_t r : st.top_token_rows) row_top[r] = 1;
    for (index_t c : st.top_channel_cols) col_top[c] = 1;

    for (index_t r = 0; r < rows; ++r) {
        for (index_t c = 0; c < cols; ++c) {
            const double v = std::fabs(m(r, c));
            if (row_top[r] && !col_top[c]) {
                st.token_max = std::max(st.token_max, v);
            } else if (col_top[c] && !row_top[r]) {
                st.channel_max = std::max(st.channel_max, v);
            } else if (!row_top[r] && !col_top[c]) {
                st.others_max = std::max(st.others_max, v);
            }
        }
    }

    std::vector<float> mags(m.values());
    for (float& v : mags) v = std::fabs(v);
    std::sort(mags.begin(), mags.end());
    static constexpr double kQuantiles[] = {0.0,  0.1,  0.25, 0.5,   0.75,   0.9,
                                            0.95, 0.99, 0.999, 0.9999, 1.0};
    for (double q : kQuantiles) {
        const std::size_t idx = static_cast<std::size_t>(
            std::llround(q * static_cast<double>(mags.size() - 1)));
        st.sparsity.emplace_back(q, static_cast<double>(mags[idx]));
    }
    return st;
}

} // namespace fbq
