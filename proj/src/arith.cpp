#include "k3f/arith.hpp"

#include <sstream>

namespace k3f {

QMat to_rat(const ZMat& m) {
    QMat q(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) q(i, j) = Rat(m(i, j));
    return q;
}

ZMat to_int(const QMat& m) {
    ZMat z(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
            if (m(i, j).get_den() != 1) throw InternalError("non-integral entry");
            z(i, j) = m(i, j).get_num();
        }
    return z;
}

IMat to_small(const ZMat& m) {
    IMat s(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
            if (!m(i, j).fits_slong_p()) throw ResourceCap("matrix entry exceeds 64-bit range");
            s(i, j) = m(i, j).get_si();
        }
    return s;
}

ZMat to_big(const IMat& m) {
    ZMat z(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) z(i, j) = Int(static_cast<long>(m(i, j)));
    return z;
}

Int determinant(const ZMat& a) {
    int n = a.rows();
    if (n != a.cols()) throw InternalError("determinant of non-square matrix");
    if (n == 0) return 1;
    ZMat m = a;
    Int prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (m(k, k) == 0) {
            int p = -1;
            for (int i = k + 1; i < n; ++i)
                if (m(i, k) != 0) { p = i; break; }
            if (p < 0) return 0;
            m.swap_rows(k, p);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) {
                Int t = m(i, j) * m(k, k) - m(i, k) * m(k, j);
                mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
                m(i, j) = t;
            }
        prev = m(k, k);
    }
    return sign * m(n - 1, n - 1);
}

QMat inverse(const QMat& a) {
    int n = a.rows();
    QMat m = a;
    QMat inv = QMat::identity(n);
    for (int k = 0; k < n; ++k) {
        int p = -1;
        for (int i = k; i < n; ++i)
            if (m(i, k) != 0) { p = i; break; }
        if (p < 0) throw InputError("degenerate lattice");
        m.swap_rows(k, p);
        inv.swap_rows(k, p);
        Rat piv = m(k, k);
        for (int j = 0; j < n; ++j) {
            m(k, j) /= piv;
            inv(k, j) /= piv;
        }
        for (int i = 0; i < n; ++i) {
            if (i == k || m(i, k) == 0) continue;
            Rat f = m(i, k);
            for (int j = 0; j < n; ++j) {
                m(i, j) -= f * m(k, j);
                inv(i, j) -= f * inv(k, j);
            }
        }
    }
    return inv;
}

bool is_symmetric(const ZMat& m) {
    if (m.rows() != m.cols()) return false;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < i; ++j)
            if (m(i, j) != m(j, i)) return false;
    return true;
}

namespace {

// Echelonize rows of m in place, applying the same row operations to t.
// Returns pivot columns.
std::vector<int> echelon(ZMat& m, ZMat* t) {
    int r = m.rows(), c = m.cols();
    std::vector<int> pivots;
    int row = 0;
    for (int col = 0; col < c && row < r; ++col) {
        for (;;) {
            int best = -1;
            for (int i = row; i < r; ++i)
                if (m(i, col) != 0 && (best < 0 || abs(m(i, col)) < abs(m(best, col)))) best = i;
            if (best < 0) break;
            m.swap_rows(row, best);
            if (t) t->swap_rows(row, best);
            bool clean = true;
            for (int i = row + 1; i < r; ++i) {
                if (m(i, col) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), m(i, col).get_mpz_t(), m(row, col).get_mpz_t());
                for (int j = col; j < c; ++j) m(i, j) -= q * m(row, j);
                if (t)
                    for (int j = 0; j < t->cols(); ++j) (*t)(i, j) -= q * (*t)(row, j);
                if (m(i, col) != 0) clean = false;
            }
            if (clean) break;
        }
        if (m(row, col) == 0) continue;
        if (m(row, col) < 0) {
            for (int j = col; j < c; ++j) m(row, j) = -m(row, j);
            if (t)
                for (int j = 0; j < t->cols(); ++j) (*t)(row, j) = -(*t)(row, j);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

}  // namespace

ZMat hnf_rows(const ZMat& a) {
    ZMat m = a;
    auto piv = echelon(m, nullptr);
    int k = int(piv.size());
    for (int i = 0; i < k; ++i) {
        int col = piv[i];
        for (int u = 0; u < i; ++u) {
            Int q;
            mpz_fdiv_q(q.get_mpz_t(), m(u, col).get_mpz_t(), m(i, col).get_mpz_t());
            if (q == 0) continue;
            for (int j = col; j < m.cols(); ++j) m(u, j) -= q * m(i, j);
        }
    }
    ZMat h(k, m.cols());
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < m.cols(); ++j) h(i, j) = m(i, j);
    return h;
}

ZMat left_kernel(const ZMat& a) {
    ZMat m = a;
    ZMat t = ZMat::identity(a.rows());
    auto piv = echelon(m, &t);
    int k = int(piv.size());
    ZMat ker(a.rows() - k, a.rows());
    for (int i = k; i < a.rows(); ++i)
        for (int j = 0; j < a.rows(); ++j) ker(i - k, j) = t(i, j);
    return hnf_rows(ker);
}

Smith smith_normal_form(const ZMat& a) {
    int r = a.rows(), c = a.cols();
    Smith s{ZMat::identity(r), a, ZMat::identity(c)};
    ZMat& D = s.D;
    auto row_op = [&](int dst, int src, const Int& q) {  // row dst -= q * row src
        for (int j = 0; j < c; ++j) D(dst, j) -= q * D(src, j);
        for (int j = 0; j < r; ++j) s.U(dst, j) -= q * s.U(src, j);
    };
    auto col_op = [&](int dst, int src, const Int& q) {  // col dst -= q * col src
        for (int i = 0; i < r; ++i) D(i, dst) -= q * D(i, src);
        for (int i = 0; i < c; ++i) s.V(i, dst) -= q * s.V(i, src);
    };
    int n = std::min(r, c);
    for (int t = 0; t < n; ++t) {
        for (;;) {
            int bi = -1, bj = -1;
            for (int i = t; i < r; ++i)
                for (int j = t; j < c; ++j)
                    if (D(i, j) != 0 && (bi < 0 || abs(D(i, j)) < abs(D(bi, bj)))) bi = i, bj = j;
            if (bi < 0) return s;
            if (bi != t) {
                D.swap_rows(t, bi);
                s.U.swap_rows(t, bi);
            }
            if (bj != t) {
                D.swap_cols(t, bj);
                s.V.swap_cols(t, bj);
            }
            bool done = true;
            for (int i = t + 1; i < r; ++i) {
                if (D(i, t) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), D(i, t).get_mpz_t(), D(t, t).get_mpz_t());
                row_op(i, t, q);
                if (D(i, t) != 0) done = false;
            }
            for (int j = t + 1; j < c; ++j) {
                if (D(t, j) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), D(t, j).get_mpz_t(), D(t, t).get_mpz_t());
                col_op(j, t, q);
                if (D(t, j) != 0) done = false;
            }
            if (!done) continue;
            int bad = -1;
            for (int i = t + 1; i < r && bad < 0; ++i)
                for (int j = t + 1; j < c; ++j)
                    if (D(i, j) % D(t, t) != 0) { bad = i; break; }
            if (bad < 0) break;
            row_op(t, bad, Int(-1));
        }
        if (D(t, t) < 0) {
            for (int j = 0; j < c; ++j) D(t, j) = -D(t, j);
            for (int j = 0; j < r; ++j) s.U(t, j) = -s.U(t, j);
        }
    }
    return s;
}

QVec mul(const QVec& x, const ZMat& m) {
    QVec y(m.cols(), Rat(0));
    for (int i = 0; i < m.rows(); ++i) {
        if (x[i] == 0) continue;
        for (int j = 0; j < m.cols(); ++j) y[j] += x[i] * m(i, j);
    }
    return y;
}

Rat dot(const QVec& x, const ZMat& g, const QVec& y) {
    QVec xg = mul(x, g);
    Rat s = 0;
    for (size_t i = 0; i < y.size(); ++i) s += xg[i] * y[i];
    return s;
}

__int128 isqrt128(__int128 n) {
    if (n < 0) throw InternalError("isqrt of negative");
    if (n < 2) return n;
    // Newton iteration from an upper bound.
    int bits = 0;
    for (__int128 t = n; t > 0; t >>= 1) ++bits;
    __int128 x = __int128(1) << ((bits + 1) / 2);
    for (;;) {
        __int128 y = (x + n / x) / 2;
        if (y >= x) break;
        x = y;
    }
    while (x * x > n) --x;
    while ((x + 1) * (x + 1) <= n) ++x;
    return x;
}

Int isqrt(const Int& n) {
    Int r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

int64_t mod_floor(int64_t a, int64_t m) {
    int64_t r = a % m;
    return r < 0 ? r + m : r;
}

int64_t gcd64(int64_t a, int64_t b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) {
        int64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

int64_t inv_mod(int64_t a, int64_t m) {
    int64_t g = m, x = 0, x1 = 1, a1 = mod_floor(a, m);
    while (a1) {
        int64_t q = g / a1;
        std::swap(g, a1);
        a1 -= q * g;
        std::swap(x, x1);
        x1 -= q * x;
    }
    if (g != 1) throw InternalError("not invertible modulo m");
    return mod_floor(x, m);
}

std::string to_string(const ZMat& m) {
    std::ostringstream os;
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
        os << "\n";
    }
    return os.str();
}

}  // namespace k3f
