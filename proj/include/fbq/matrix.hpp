#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fbq/error.hpp"

namespace fbq {

using index_t = std::int64_t;

// Row-major full-precision matrix. Immutable after construction; construction
// rejects non-finite values.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(index_t rows, index_t cols); // zero-filled
    DenseMatrix(index_t rows, index_t cols, std::vector<float> data);

    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }
    index_t size() const { return rows_ * cols_; }

    float operator()(index_t r, index_t c) const { return data_[r * cols_ + c]; }
    float at(index_t r, index_t c) const; // bounds-checked

    const float* data() const { return data_.data(); }
    const float* row(index_t r) const { return data_.data() + r * cols_; }
    const std::vector<float>& values() const { return data_; }

private:
    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<float> data_;
};

DenseMatrix transpose(const DenseMatrix& m);

// Quantization-group extents. Named constructors cover the usual granularities.
struct GroupGeometry {
    index_t group_rows = 1;
    index_t group_cols = 1;

    GroupGeometry(index_t gr, index_t gc);

    static GroupGeometry per_tensor(index_t rows, index_t cols) { return {rows, cols}; }
    static GroupGeometry per_token(index_t cols) { return {1, cols}; }
    static GroupGeometry per_channel(index_t rows) { return {rows, 1}; }
    static GroupGeometry per_block(index_t side_rows, index_t side_cols) {
        return {side_rows, side_cols};
    }

    bool operator==(const GroupGeometry&) const = default;
};

struct BlockIndex {
    index_t row = 0;
    index_t col = 0;
};

inline index_t ceil_div(index_t a, index_t b) { return (a + b - 1) / b; }

inline index_t grid_rows(index_t rows, const GroupGeometry& g) {
    return ceil_div(rows, g.group_rows);
}
inline index_t grid_cols(index_t cols, const GroupGeometry& g) {
    return ceil_div(cols, g.group_cols);
}

// Non-owning view of one group. Boundary groups are truncated to the matrix
// edge, so rows/cols may be smaller than the geometry.
struct BlockView {
    const float* data = nullptr;
    index_t ld = 0;   // parent row stride
    index_t rows = 0; // actual extent
    index_t cols = 0;
    index_t row0 = 0; // origin in the parent matrix
    index_t col0 = 0;

    float operator()(index_t r, index_t c) const { return data[r * ld + c]; }
};

BlockView block_view(const DenseMatrix& m, const GroupGeometry& g, BlockIndex idx);

// ".fmat" binary format: magic "FMAT", u32 LE version (1), u64 LE rows, u64 LE
// cols, then rows*cols float32 LE row-major. Round-trips bit-exactly.
void save_matrix(const DenseMatrix& m, const std::string& path);
DenseMatrix load_matrix(const std::string& path);

} // namespace fbq
