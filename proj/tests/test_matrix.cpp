#include "fbq/matrix.hpp"
#include "fbq/rng.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "testing.hpp"

using namespace fbq;
using testing::check;
using testing::check_near;

namespace {

DenseMatrix random_matrix(index_t rows, index_t cols, std::uint64_t seed) {
    DeterministicRng rng(seed);
    std::vector<float> v(static_cast<std::size_t>(rows * cols));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.normal_at(i);
    return DenseMatrix(rows, cols, std::move(v));
}

std::filesystem::path tmp_dir() {
    auto p = std::filesystem::temp_directory_path() / "fbq_test_matrix";
    std::filesystem::create_directories(p);
    return p;
}

void test_construction() {
    DenseMatrix m(2, 3, {1, 2, 3, 4, 5, 6});
    check(m.rows() == 2 && m.cols() == 3, "dims");
    check(m(1, 2) == 6.0f, "element access");

    bool threw = false;
    try {
        DenseMatrix bad(2, 2, {1, 2, 3});
    } catch (const std::invalid_argument&) {
        threw = true;
    }
    check(threw, "length mismatch rejected");

    threw = false;
    try {
        DenseMatrix bad(1, 2, {1.0f, std::numeric_limits<float>::infinity()});
    } catch (const std::invalid_argument&) {
        threw = true;
    }
    check(threw, "non-finite rejected");

    threw = false;
    try {
        (void)m.at(2, 0);
    } catch (const std::out_of_range&) {
        threw = true;
    }
    check(threw, "at() bounds-checked");
}

void test_block_view() {
    std::vector<float> v(16);
    for (int i = 0; i < 16; ++i) v[i] = static_cast<float>(i);
    DenseMatrix m(4, 4, std::move(v));

    // bottom-right 2x2 of a 4x4 under 2x2 geometry
    BlockView b = block_view(m, GroupGeometry(2, 2), {1, 1});
    check(b.rows == 2 && b.cols == 2, "full interior block extent");
    check(b(0, 0) == 10.0f && b(1, 1) == 15.0f, "block contents");

    // 5x5 with 4x4 geometry: corner block truncates to 1x1
    std::vector<float> w(25);
    for (int i = 0; i < 25; ++i) w[i] = static_cast<float>(i);
    DenseMatrix m5(5, 5, std::move(w));
    BlockView corner = block_view(m5, GroupGeometry(4, 4), {1, 1});
    check(corner.rows == 1 && corner.cols == 1, "boundary block truncated");
    check(corner(0, 0) == 24.0f, "boundary block value");

    // per-tensor geometry covers the whole matrix
    BlockView whole = block_view(m5, GroupGeometry::per_tensor(5, 5), {0, 0});
    check(whole.rows == 5 && whole.cols == 5, "per-tensor view");

    bool threw = false;
    try {
        (void)block_view(m, GroupGeometry(2, 2), {2, 0});
    } catch (const std::out_of_range&) {
        threw = true;
    }
    check(threw, "out-of-range block index");
}

void test_partition_property() {
    const DenseMatrix m = random_matrix(37, 23, 99);
    const GroupGeometry g(8, 5);
    std::vector<int> seen(static_cast<std::size_t>(m.size()), 0);
    double sum_views = 0.0, sum_all = 0.0;
    for (index_t bi = 0; bi < grid_rows(m.rows(), g); ++bi) {
        for (index_t bj = 0; bj < grid_cols(m.cols(), g); ++bj) {
            const BlockView v = block_view(m, g, {bi, bj});
            for (index_t r = 0; r < v.rows; ++r) {
                for (index_t c = 0; c < v.cols; ++c) {
                    seen[(v.row0 + r) * m.cols() + (v.col0 + c)] += 1;
                    sum_views += v(r, c);
                }
            }
        }
    }
    bool exactly_once = true;
    for (int s : seen) exactly_once &= (s == 1);
    check(exactly_once, "views tile the matrix exactly once");
    for (index_t i = 0; i < m.size(); ++i) sum_all += m.data()[i];
    check_near(sum_views, sum_all, 1e-5, "view union reconstructs the matrix");
}

void test_io_roundtrip() {
    const auto dir = tmp_dir();
    const auto path = (dir / "roundtrip.fmat").string();
    const DenseMatrix m = random_matrix(3, 3, 1234);
    save_matrix(m, path);
    const DenseMatrix r = load_matrix(path);
    check(r.rows() == 3 && r.cols() == 3, "roundtrip dims");
    check(std::memcmp(r.data(), m.data(), sizeof(float) * 9) == 0, "roundtrip bit-identical");
}

void test_io_errors() {
    const auto dir = tmp_dir();

    const auto bad_magic = (dir / "bad_magic.fmat").string();
    {
        std::ofstream out(bad_magic, std::ios::binary);
        out.write("NOPE", 4);
        std::vector<char> rest(20 + 16, 0);
        out.write(rest.data(), static_cast<std::streamsize>(rest.size()));
    }
    bool threw = false;
    std::size_t offset = 999;
    try {
        (void)load_matrix(bad_magic);
    } catch (const FormatError& e) {
        threw = true;
        offset = e.byte_offset();
    }
    check(threw && offset == 0, "bad magic reported at offset 0");

    // header says 2x2 but only 3 floats follow
    const auto truncated = (dir / "truncated.fmat").string();
    {
        const DenseMatrix m(2, 2, {1, 2, 3, 4});
        save_matrix(m, truncated);
        std::filesystem::resize_file(truncated, 24 + 3 * sizeof(float));
    }
    threw = false;
    try {
        (void)load_matrix(truncated);
    } catch (const FormatError& e) {
        threw = true;
        offset = e.byte_offset();
    }
    check(threw && offset == 24 + 12, "truncation reported at payload end");

    // NaN payload
    const auto nonfinite = (dir / "nonfinite.fmat").string();
    {
        const DenseMatrix m(1, 2, {1, 2});
        save_matrix(m, nonfinite);
        std::fstream f(nonfinite, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(24 + 4);
        const std::uint32_t nan_bits = 0x7FC00000u;
        f.write(reinterpret_cast<const char*>(&nan_bits), 4);
    }
    threw = false;
    try {
        (void)load_matrix(nonfinite);
    } catch (const FormatError& e) {
        threw = true;
        offset = e.byte_offset();
    }
    check(threw && offset == 28, "non-finite value reported at its offset");
}

void test_rng() {
    DeterministicRng a(42), b(42), c(43);
    bool equal = true;
    for (std::uint64_t i = 0; i < 1000000; ++i) {
        equal &= a.bits_at(i) == b.bits_at(i);
    }
    check(equal, "same seed, same 1e6-value stream");
    check(a.bits_at(7) != c.bits_at(7), "different seeds differ");

    // stream walk matches random access regardless of call order
    DeterministicRng s(7);
    const std::uint64_t w0 = s.next_bits();
    const std::uint64_t w1 = s.next_bits();
    check(w0 == DeterministicRng(7).bits_at(0) && w1 == DeterministicRng(7).bits_at(1),
          "stream equals positional access");

    double mean = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) mean += DeterministicRng(5).uniform_at(i);
    mean /= n;
    check_near(mean, 0.5, 0.01, "uniform mean sanity");

    double nm = 0.0, nv = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = DeterministicRng(6).normal_at(i);
        nm += z;
        nv += z * z;
    }
    check_near(nm / n, 0.0, 0.02, "normal mean sanity");
    check_near(nv / n, 1.0, 0.03, "normal variance sanity");
}

void test_transpose() {
    const DenseMatrix m = random_matrix(5, 3, 8);
    const DenseMatrix t = transpose(m);
    bool ok = t.rows() == 3 && t.cols() == 5;
    for (index_t r = 0; r < m.rows() && ok; ++r) {
        for (index_t c = 0; c < m.cols(); ++c) {
            ok &= t(c, r) == m(r, c);
        }
    }
    check(ok, "transpose");
}

} // namespace

int main() {
    testing::section("construction invariants", test_construction);
    testing::section("block_view", test_block_view);
    testing::section("block partition property", test_partition_property);
    testing::section("fmat roundtrip", test_io_roundtrip);
    testing::section("fmat error paths", test_io_errors);
    testing::section("deterministic rng", test_rng);
    testing::section("transpose", test_transpose);
    return testing::report("test_matrix");
}
