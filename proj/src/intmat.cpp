#include "fracfact/intmat.hpp"

#include <algorithm>
#include <utility>

#include "fracfact/error.hpp"

namespace fracfact {

IntMatrix IntMatrix::identity(int n) {
    IntMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        m.at(i, i) = 1;
    return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<long long>>& rows) {
    int r = static_cast<int>(rows.size());
    int c = r == 0 ? 0 : static_cast<int>(rows[0].size());
    IntMatrix m(r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(rows[i].size()) != c)
            throw Error("ragged row list");
        for (int j = 0; j < c; ++j)
            m.at(i, j) = static_cast<long>(rows[i][j]);
    }
    return m;
}

IntMatrix IntMatrix::transposed() const {
    IntMatrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            t.at(j, i) = at(i, j);
    return t;
}

void IntMatrix::swap_rows(int i, int j) {
    if (i == j)
        return;
    for (int c = 0; c < cols_; ++c)
        std::swap(at(i, c), at(j, c));
}

IntMatrix matmul(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols() != b.rows())
        throw Error("matmul dimension mismatch");
    IntMatrix r(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const Int& aik = a.at(i, k);
            if (aik == 0)
                continue;
            for (int j = 0; j < b.cols(); ++j)
                r.at(i, j) += aik * b.at(k, j);
        }
    return r;
}

IntMatrix vstack(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols() != b.cols())
        throw Error("vstack column mismatch");
    IntMatrix r(a.rows() + b.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            r.at(i, j) = a.at(i, j);
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j)
            r.at(a.rows() + i, j) = b.at(i, j);
    return r;
}

HnfResult hermite_normal_form(const IntMatrix& a) {
    HnfResult res{a, IntMatrix::identity(a.rows()), 0};
    IntMatrix& h = res.h;
    IntMatrix& u = res.u;
    const int m = a.rows(), n = a.cols();

    int row = 0;
    for (int col = 0; col < n && row < m; ++col) {
        // Eliminate below h(row,col) by repeated division steps on the
        // smallest nonzero entry; this is the Euclidean algorithm played
        // out with row operations.
        while (true) {
            int piv = -1;
            for (int i = row; i < m; ++i) {
                if (h.at(i, col) == 0)
                    continue;
                if (piv < 0 ||
                    mpz_cmpabs(h.at(i, col).get_mpz_t(), h.at(piv, col).get_mpz_t()) < 0)
                    piv = i;
            }
            if (piv < 0)
                break; // column clear
            h.swap_rows(row, piv);
            u.swap_rows(row, piv);
            bool clean = true;
            const Int& d = h.at(row, col);
            for (int i = row + 1; i < m; ++i) {
                if (h.at(i, col) == 0)
                    continue;
                Int qq;
                // round-to-nearest quotient keeps entries small
                mpz_class num = h.at(i, col), den = d;
                mpz_fdiv_q(qq.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
                Int rem = num - qq * den;
                if (abs(rem) * 2 > abs(den))
                    qq += 1;
                if (qq != 0) {
                    for (int c = 0; c < n; ++c)
                        h.at(i, c) -= qq * h.at(row, c);
                    for (int c = 0; c < m; ++c)
                        u.at(i, c) -= qq * u.at(row, c);
                }
                if (h.at(i, col) != 0)
                    clean = false;
            }
            if (clean)
                break;
        }
        if (h.at(row, col) == 0)
            continue;
        if (h.at(row, col) < 0) {
            for (int c = 0; c < n; ++c)
                h.at(row, c) = -h.at(row, c);
            for (int c = 0; c < m; ++c)
                u.at(row, c) = -u.at(row, c);
        }
        // Reduce entries above the pivot into [0, pivot).
        const Int& d = h.at(row, col);
        for (int i = 0; i < row; ++i) {
            Int qq;
            mpz_fdiv_q(qq.get_mpz_t(), h.at(i, col).get_mpz_t(), d.get_mpz_t());
            if (qq != 0) {
                for (int c = 0; c < n; ++c)
                    h.at(i, c) -= qq * h.at(row, c);
                for (int c = 0; c < m; ++c)
                    u.at(i, c) -= qq * u.at(row, c);
            }
        }
        ++row;
    }
    res.rank = row;
    return res;
}

int integer_rank(const IntMatrix& a) { return hermite_normal_form(a).rank; }

Int determinant(const IntMatrix& a) {
    if (a.rows() != a.cols())
        throw Error("determinant of non-square matrix");
    const int n = a.rows();
    if (n == 0)
        return 1;
    IntMatrix m = a;
    Int prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (m.at(k, k) == 0) {
            int piv = -1;
            for (int i = k + 1; i < n; ++i)
                if (m.at(i, k) != 0) {
                    piv = i;
                    break;
                }
            if (piv < 0)
                return 0;
            m.swap_rows(k, piv);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) {
                Int num = m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j);
                m.at(i, j) = num / prev; // Bareiss: division is exact
            }
        prev = m.at(k, k);
    }
    return sign > 0 ? m.at(n - 1, n - 1) : -m.at(n - 1, n - 1);
}

namespace {

Int dot(const std::vector<Int>& a, const std::vector<Int>& b) {
    Int s = 0;
    for (size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

// One pass of integer size reduction: subtract rounded projections of
// earlier vectors. Not LLL; just keeps HNF transform rows modest.
void size_reduce(std::vector<std::vector<Int>>& basis) {
    for (int pass = 0; pass < 4; ++pass) {
        bool changed = false;
        for (size_t i = 0; i < basis.size(); ++i)
            for (size_t j = 0; j < basis.size(); ++j) {
                if (i == j)
                    continue;
                Int den = dot(basis[j], basis[j]);
                if (den == 0)
                    continue;
                Int num = dot(basis[i], basis[j]);
                // nearest integer to num/den
                Int qq, rem;
                mpz_fdiv_qr(qq.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
                if (rem * 2 > den)
                    qq += 1;
                if (qq == 0)
                    continue;
                for (size_t c = 0; c < basis[i].size(); ++c)
                    basis[i][c] -= qq * basis[j][c];
                changed = true;
            }
        if (!changed)
            break;
    }
}

} // namespace

std::vector<std::vector<Int>> kernel_basis(const IntMatrix& a) {
    // Row-HNF the transpose: u * a' = h. Rows of u facing zero rows of h
    // are a basis of the right kernel of a, saturated because u is
    // unimodular.
    HnfResult r = hermite_normal_form(a.transposed());
    std::vector<std::vector<Int>> basis;
    for (int i = r.rank; i < r.u.rows(); ++i) {
        std::vector<Int> v(a.cols());
        for (int j = 0; j < a.cols(); ++j)
            v[j] = r.u.at(i, j);
        basis.push_back(std::move(v));
    }
    size_reduce(basis);
    return basis;
}

bool in_integer_row_span(const IntMatrix& m, const std::vector<Int>& v) {
    if (static_cast<int>(v.size()) != m.cols())
        throw Error("in_integer_row_span dimension mismatch");
    HnfResult r = hermite_normal_form(m);
    std::vector<Int> rem = v;
    for (int i = 0; i < r.rank; ++i) {
        int col = 0;
        while (col < r.h.cols() && r.h.at(i, col) == 0)
            ++col;
        if (col == r.h.cols())
            break;
        if (rem[col] == 0)
            continue;
        Int qq, rr;
        mpz_fdiv_qr(qq.get_mpz_t(), rr.get_mpz_t(), rem[col].get_mpz_t(),
                    r.h.at(i, col).get_mpz_t());
        if (rr != 0)
            return false;
        for (int c = 0; c < r.h.cols(); ++c)
            rem[c] -= qq * r.h.at(i, c);
    }
    for (const Int& x : rem)
        if (x != 0)
            return false;
    return true;
}

bool same_row_space(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols() != b.cols())
        throw Error("same_row_space column mismatch");
    int ra = integer_rank(a);
    int rb = integer_rank(b);
    if (ra != rb)
        return false;
    return integer_rank(vstack(a, b)) == ra;
}

long long to_long_checked(const Int& v) {
    if (!v.fits_slong_p())
        throw NumericError("integer too large for 64-bit move/fiber arithmetic");
    return v.get_si();
}

} // namespace fracfact
