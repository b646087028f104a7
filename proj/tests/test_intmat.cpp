#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracfact/design.hpp"
#include "fracfact/intmat.hpp"
#include "fracfact/model.hpp"
#include "fracfact/rng.hpp"

using namespace fracfact;

namespace {

IntMatrix wave_solder_x0t() {
    auto spec = DesignSpec(7, {Generator{5, Word::parse("ABD", 7)},
                               Generator{6, Word::parse("ACD", 7)},
                               Generator{7, Word::parse("BCD", 7)}});
    auto d = build_design_matrix(spec);
    return build_covariate_matrix(d, ModelSpec::parse("AC/BD/E/F/G", 7)).x0_transposed();
}

bool is_row_hnf(const IntMatrix& h, int rank) {
    int prev_pivot = -1;
    for (int i = 0; i < h.rows(); ++i) {
        int pivot = -1;
        for (int j = 0; j < h.cols(); ++j)
            if (h.at(i, j) != 0) {
                pivot = j;
                break;
            }
        if (i < rank) {
            if (pivot < 0 || pivot <= prev_pivot)
                return false;
            if (h.at(i, pivot) <= 0)
                return false;
            for (int r = 0; r < i; ++r)
                if (h.at(r, pivot) < 0 || h.at(r, pivot) >= h.at(i, pivot))
                    return false;
            prev_pivot = pivot;
        } else if (pivot >= 0) {
            return false; // zero rows must come last
        }
    }
    return true;
}

} // namespace

TEST_CASE("hnf of identity and zero matrices") {
    auto id = IntMatrix::identity(4);
    auto r = hermite_normal_form(id);
    CHECK(r.h == id);
    CHECK(r.u == id);
    CHECK(r.rank == 4);

    IntMatrix zero(3, 3);
    auto rz = hermite_normal_form(zero);
    CHECK(rz.rank == 0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(rz.h.at(i, j) == 0);
}

TEST_CASE("hnf of a small example verifies U*A = H") {
    auto a = IntMatrix::from_rows({{2, 4}, {1, 3}});
    auto r = hermite_normal_form(a);
    CHECK(matmul(r.u, a) == r.h);
    CHECK(is_row_hnf(r.h, r.rank));
    CHECK(r.rank == 2);
    Int det_u = determinant(r.u);
    CHECK((det_u == 1 || det_u == -1));
}

TEST_CASE("kernel of the wave-solder configuration has dimension 6") {
    auto x0t = wave_solder_x0t();
    CHECK(integer_rank(x0t) == 10);
    auto basis = kernel_basis(x0t);
    REQUIRE(basis.size() == 6);
    for (const auto& z : basis)
        for (int r = 0; r < x0t.rows(); ++r) {
            Int s = 0;
            for (int c = 0; c < x0t.cols(); ++c)
                s += x0t.at(r, c) * z[c];
            CHECK(s == 0);
        }
}

TEST_CASE("square nonsingular matrix has empty kernel") {
    auto a = IntMatrix::from_rows({{2, 1}, {1, 1}});
    CHECK(kernel_basis(a).empty());
}

TEST_CASE("lifted 2^{4-1} main-effects matrix has rank 13 and kernel 3") {
    auto spec = DesignSpec(4, {Generator{4, Word::parse("AC", 4)}});
    auto d = build_design_matrix(spec);
    auto x0t = build_covariate_matrix(d, ModelSpec::parse("A/B/C/D", 4)).x0_transposed();
    auto lifted = lawrence_lift(x0t);
    REQUIRE(lifted.rows() == 13);
    REQUIRE(lifted.cols() == 16);
    CHECK(integer_rank(lifted) == 13);
    auto basis = kernel_basis(lifted);
    REQUIRE(basis.size() == 3);
    // complement structure z_{k+i} = -z_i holds for the whole kernel
    for (const auto& z : basis)
        for (int i = 0; i < 8; ++i)
            CHECK(z[8 + i] == -z[i]);
}

TEST_CASE("random matrices: rank-nullity, exactness and span completeness") {
    Xoshiro256pp rng(20240817);
    for (int trial = 0; trial < 40; ++trial) {
        const int rows = 1 + static_cast<int>(rng.next_below(3));
        const int cols = 2 + static_cast<int>(rng.next_below(4));
        std::vector<std::vector<long long>> rowsv(rows, std::vector<long long>(cols));
        for (auto& r : rowsv)
            for (auto& v : r)
                v = static_cast<long long>(rng.next_below(7)) - 3;
        auto a = IntMatrix::from_rows(rowsv);

        auto r = hermite_normal_form(a);
        CHECK(matmul(r.u, a) == r.h);
        CHECK(is_row_hnf(r.h, r.rank));
        Int det_u = determinant(r.u);
        CHECK((det_u == 1 || det_u == -1));

        auto basis = kernel_basis(a);
        CHECK(static_cast<int>(basis.size()) == cols - r.rank);
        for (const auto& z : basis)
            for (int i = 0; i < rows; ++i) {
                Int s = 0;
                for (int j = 0; j < cols; ++j)
                    s += a.at(i, j) * z[j];
                CHECK(s == 0);
            }

        // every small kernel vector is an integer combination of the basis
        IntMatrix kb(static_cast<int>(basis.size()), cols);
        for (size_t i = 0; i < basis.size(); ++i)
            for (int j = 0; j < cols; ++j)
                kb.at(static_cast<int>(i), j) = basis[i][j];
        std::vector<long long> v(cols, -3);
        while (true) {
            bool in_kernel = true;
            for (int i = 0; i < rows && in_kernel; ++i) {
                long long s = 0;
                for (int j = 0; j < cols; ++j)
                    s += rowsv[i][j] * v[j];
                in_kernel = s == 0;
            }
            if (in_kernel) {
                std::vector<Int> vi(cols);
                for (int j = 0; j < cols; ++j)
                    vi[j] = static_cast<long>(v[j]);
                CHECK(in_integer_row_span(kb, vi));
            }
            int pos = 0;
            while (pos < cols && v[pos] == 3)
                v[pos++] = -3;
            if (pos == cols)
                break;
            ++v[pos];
        }
    }
}

TEST_CASE("same_row_space") {
    auto a = IntMatrix::from_rows({{1, 0, 1}, {0, 1, 1}});
    auto b = IntMatrix::from_rows({{1, 1, 2}, {1, -1, 0}});
    auto c = IntMatrix::from_rows({{1, 0, 0}, {0, 1, 1}});
    CHECK(same_row_space(a, b));
    CHECK(!same_row_space(a, c));
}
