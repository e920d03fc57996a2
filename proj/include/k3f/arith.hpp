// Exact integer and rational matrices shared by all modules.
#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace k3f {

using Int = mpz_class;
using Rat = mpq_class;

// Error categories map onto CLI exit codes.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResourceCap : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MassCheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

template <class T>
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols, const T& fill = T()) : r_(rows), c_(cols), a_(size_t(rows) * cols, fill) {}

    static Mat identity(int n) {
        Mat m(n, n, T(0));
        for (int i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }
    static Mat from_rows(const std::vector<std::vector<T>>& rows) {
        int r = int(rows.size());
        int c = r ? int(rows[0].size()) : 0;
        Mat m(r, c);
        for (int i = 0; i < r; ++i) {
            if (int(rows[i].size()) != c) throw InputError("ragged matrix");
            for (int j = 0; j < c; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    int rows() const { return r_; }
    int cols() const { return c_; }
    T& operator()(int i, int j) { return a_[size_t(i) * c_ + j]; }
    const T& operator()(int i, int j) const { return a_[size_t(i) * c_ + j]; }

    std::vector<T> row(int i) const { return {a_.begin() + size_t(i) * c_, a_.begin() + size_t(i + 1) * c_}; }
    void set_row(int i, const std::vector<T>& v) {
        for (int j = 0; j < c_; ++j) (*this)(i, j) = v[j];
    }
    void swap_rows(int i, int j) {
        for (int k = 0; k < c_; ++k) std::swap((*this)(i, k), (*this)(j, k));
    }
    void swap_cols(int i, int j) {
        for (int k = 0; k < r_; ++k) std::swap((*this)(k, i), (*this)(k, j));
    }

    Mat transpose() const {
        Mat t(c_, r_);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    bool operator==(const Mat& o) const { return r_ == o.r_ && c_ == o.c_ && a_ == o.a_; }
    bool operator!=(const Mat& o) const { return !(*this == o); }

    const std::vector<T>& data() const { return a_; }

private:
    int r_ = 0, c_ = 0;
    std::vector<T> a_;
};

using ZMat = Mat<Int>;
using QMat = Mat<Rat>;
using IMat = Mat<int64_t>;
using ZVec = std::vector<Int>;
using QVec = std::vector<Rat>;

template <class T>
Mat<T> operator*(const Mat<T>& a, const Mat<T>& b) {
    if (a.cols() != b.rows()) throw InternalError("matrix shape mismatch");
    Mat<T> c(a.rows(), b.cols(), T(0));
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            if (a(i, k) == 0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
        }
    return c;
}

QMat to_rat(const ZMat& m);
ZMat to_int(const QMat& m);  // throws InternalError if an entry is not integral
IMat to_small(const ZMat& m);  // throws ResourceCap if an entry overflows int64
ZMat to_big(const IMat& m);

// Fraction-free determinant.
Int determinant(const ZMat& m);
// Inverse over Q; throws InputError("degenerate lattice") when singular.
QMat inverse(const QMat& m);
bool is_symmetric(const ZMat& m);

// Row-style Hermite normal form of the row span; zero rows dropped.
ZMat hnf_rows(const ZMat& m);

struct Smith {
    ZMat U, D, V;  // U * A * V = D, U and V unimodular
};
Smith smith_normal_form(const ZMat& a);

// Integer row vectors x with x * A = 0 (a basis of the saturated left kernel).
ZMat left_kernel(const ZMat& a);

// Rational row vector times integer matrix.
QVec mul(const QVec& x, const ZMat& m);
Rat dot(const QVec& x, const ZMat& g, const QVec& y);

// Exact floor of the square root of a nonnegative 128-bit integer.
__int128 isqrt128(__int128 n);
Int isqrt(const Int& n);

int64_t mod_floor(int64_t a, int64_t m);
int64_t gcd64(int64_t a, int64_t b);
int64_t inv_mod(int64_t a, int64_t m);

std::string to_string(const ZMat& m);

}  // namespace k3f
