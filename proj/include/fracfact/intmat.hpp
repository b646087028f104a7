#ifndef FRACFACT_INTMAT_HPP
#define FRACFACT_INTMAT_HPP

#include <cstdint>
#include <vector>

#include <gmpxx.h>

namespace fracfact {

using Int = mpz_class;

/// Dense matrix of arbitrary-precision integers, row-major.
class IntMatrix {
public:
    IntMatrix() : rows_(0), cols_(0) {}
    IntMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols) {}

    static IntMatrix identity(int n);
    static IntMatrix from_rows(const std::vector<std::vector<long long>>& rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Int& at(int i, int j) { return a_[size_t(i) * cols_ + j]; }
    const Int& at(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

    IntMatrix transposed() const;
    void swap_rows(int i, int j);

    bool operator==(const IntMatrix&) const = default;

private:
    int rows_, cols_;
    std::vector<Int> a_;
};

IntMatrix matmul(const IntMatrix& a, const IntMatrix& b);

/// Stack b below a (same column count).
IntMatrix vstack(const IntMatrix& a, const IntMatrix& b);

struct HnfResult {
    IntMatrix h; // row-style Hermite normal form
    IntMatrix u; // unimodular, u*a == h
    int rank = 0;
};

/// Row-style HNF: pivots positive, zero below each pivot, entries above a
/// pivot reduced to [0, pivot), zero rows last. u is built by applying the
/// same row operations to the identity, so det(u) = +-1 and u*a = h.
HnfResult hermite_normal_form(const IntMatrix& a);

int integer_rank(const IntMatrix& a);

/// Determinant by fraction-free (Bareiss) elimination; matrix must be square.
Int determinant(const IntMatrix& a);

/// Basis of the saturated integer kernel {z : a*z = 0}, one vector per row
/// of the result; size = cols - rank. Vectors are size-reduced against each
/// other to keep entries small.
std::vector<std::vector<Int>> kernel_basis(const IntMatrix& a);

/// Is v an integer combination of the rows of m?
bool in_integer_row_span(const IntMatrix& m, const std::vector<Int>& v);

/// Do a and b have the same row space over the rationals?
bool same_row_space(const IntMatrix& a, const IntMatrix& b);

/// Checked narrowing for interop with the move/fiber layers.
long long to_long_checked(const Int& v);

} // namespace fracfact

#endif
