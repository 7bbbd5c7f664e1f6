#include "fbq/matrix.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fbq {

namespace {

void check_finite(const std::vector<float>& data) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            throw std::invalid_argument("non-finite value at element " + std::to_string(i));
        }
    }
}

} // namespace

DenseMatrix::DenseMatrix(index_t rows, index_t cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
    data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0f);
}

DenseMatrix::DenseMatrix(index_t rows, index_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
    if (data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw std::invalid_argument("data length does not match rows*cols");
    }
    check_finite(data_);
}

float DenseMatrix::at(index_t r, index_t c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) {
        throw std::out_of_range("matrix index out of range");
    }
    return data_[r * cols_ + c];
}

DenseMatrix transpose(const DenseMatrix& m) {
    std::vector<float> out(static_cast<std::size_t>(m.size()));
    const index_t r = m.rows(), c = m.cols();
    for (index_t i = 0; i < r; ++i) {
        for (index_t j = 0; j < c; ++j) {
            out[j * r + i] = m(i, j);
        }
    }
    return DenseMatrix(c, r, std::move(out));
}

GroupGeometry::GroupGeometry(index_t gr, index_t gc) : group_rows(gr), group_cols(gc) {
    if (gr < 1 || gc < 1) throw std::invalid_argument("group extents must be >= 1");
}

BlockView block_view(const DenseMatrix& m, const GroupGeometry& g, BlockIndex idx) {
    const index_t gr = grid_rows(m.rows(), g);
    const index_t gc = grid_cols(m.cols(), g);
    if (idx.row < 0 || idx.row >= gr || idx.col < 0 || idx.col >= gc) {
        throw std::out_of_range("block index out of range");
    }
    BlockView v;
    v.row0 = idx.row * g.group_rows;
    v.col0 = idx.col * g.group_cols;
    v.rows = std::min(g.group_rows, m.rows() - v.row0);
    v.cols = std::min(g.group_cols, m.cols() - v.col0);
    v.ld = m.cols();
    v.data = m.data() + v.row0 * m.cols() + v.col0;
    return v;
}

namespace {

constexpr char kMagic[4] = {'F', 'M', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "file I/O assumes a little-endian host");

void put_u32(std::string& buf, std::uint32_t v) {
    buf.append(reinterpret_cast<const char*>(&v), 4);
}
void put_u64(std::string& buf, std::uint64_t v) {
    buf.append(reinterpret_cast<const char*>(&v), 8);
}

} // namespace

void save_matrix(const DenseMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing", 0);

    std::string header(kMagic, 4);
    put_u32(header, kVersion);
    put_u64(header, static_cast<std::uint64_t>(m.rows()));
    put_u64(header, static_cast<std::uint64_t>(m.cols()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(float)));
    if (!out) throw FormatError("short write to '" + path + "'", header.size());
}

DenseMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'", 0);

    char header[24];
    in.read(header, sizeof(header));
    if (in.gcount() != sizeof(header)) {
        throw FormatError("truncated header", static_cast<std::size_t>(in.gcount()));
    }
    if (std::memcmp(header, kMagic, 4) != 0) throw FormatError("bad magic", 0);

    std::uint32_t version;
    std::uint64_t rows, cols;
    std::memcpy(&version, header + 4, 4);
    std::memcpy(&rows, header + 8, 8);
    std::memcpy(&cols, header + 16, 8);
    if (version != kVersion) throw FormatError("unsupported version", 4);
    if (rows > (1ull << 31) || cols > (1ull << 31) ||
        (rows != 0 && cols > (1ull << 40) / rows)) {
        throw FormatError("implausible dimensions", 8);
    }

    const std::size_t count = static_cast<std::size_t>(rows * cols);
    std::vector<float> data(count);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    const std::size_t got = static_cast<std::size_t>(in.gcount());
    if (got != count * sizeof(float)) {
        throw FormatError("truncated payload", 24 + got);
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::isfinite(data[i])) {
            throw FormatError("non-finite value", 24 + i * sizeof(float));
        }
    }
    return DenseMatrix(static_cast<index_t>(rows), static_cast<index_t>(cols), std::move(data));
}

} // namespace fbq
