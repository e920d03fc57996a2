#include <algorithm>

#include "k3f/definite.hpp"

namespace k3f {

namespace {

Int round_div(const Int& a, const Int& d) {
    // nearest integer to a/d for d > 0
    Int q;
    Int num = 2 * a + d, den = 2 * d;
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return q;
}

void add_multiple(ZMat& G, ZMat& H, int k, int l, const Int& q) {
    int n = G.rows();
    for (int j = 0; j < n; ++j) G(k, j) -= q * G(l, j);
    for (int j = 0; j < n; ++j) G(j, k) -= q * G(j, l);
    for (int j = 0; j < n; ++j) H(k, j) -= q * H(l, j);
}

void swap_basis(ZMat& G, ZMat& H, int a, int b) {
    G.swap_rows(a, b);
    G.swap_cols(a, b);
    H.swap_rows(a, b);
}

template <class T>
T isqrt_t(const T& n);
template <>
__int128 isqrt_t(const __int128& n) {
    return isqrt128(n);
}
template <>
Int isqrt_t(const Int& n) {
    return isqrt(n);
}

template <class T>
T floor_div(const T& a, const T& b);  // b > 0
template <>
__int128 floor_div(const __int128& a, const __int128& b) {
    __int128 q = a / b;
    if ((a % b != 0) && (a < 0)) --q;
    return q;
}
template <>
Int floor_div(const Int& a, const Int& b) {
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

Int to_Int(const __int128& v) {
    bool neg = v < 0;
    unsigned __int128 u = neg ? -(unsigned __int128)v : (unsigned __int128)v;
    Int r = 0;
    Int base = Int(1) << 64;
    r = Int(static_cast<unsigned long>(u >> 64)) * base + Int(static_cast<unsigned long>(u & ~0ULL));
    return neg ? Int(-r) : r;
}

__int128 from_Int(const Int& v, __int128*) {
    Int a = abs(v);
    Int hi = a >> 64, lo = a - (hi << 64);
    __int128 r = (__int128(hi.get_ui()) << 64) | __int128(lo.get_ui());
    return v < 0 ? -r : r;
}
Int from_Int(const Int& v, Int*) { return v; }

// Fincke-Pohst with exact Bareiss minors: Q(x) = sum_k (D[k+1] x_k + beta_k)^2 / (D[k] D[k+1]).
template <class T>
std::vector<std::vector<T>> enumerate(const ZMat& G, const Int& bound) {
    int n = G.rows();
    ZMat A = G;
    std::vector<Int> Dz(n + 1);
    Dz[0] = 1;
    ZMat Mz(n, n, Int(0));
    for (int k = 0; k < n; ++k) {
        for (int j = k; j < n; ++j) Mz(k, j) = A(k, j);
        Dz[k + 1] = A(k, k);
        if (Dz[k + 1] <= 0) throw InputError("lattice is not positive definite");
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) A(i, j) = (A(k, k) * A(i, j) - A(i, k) * A(k, j)) / Dz[k];
    }
    std::vector<T> D(n + 1);
    std::vector<std::vector<T>> M(n, std::vector<T>(n));
    for (int k = 0; k <= n; ++k) D[k] = from_Int(Dz[k], (T*)nullptr);
    for (int k = 0; k < n; ++k)
        for (int j = k; j < n; ++j) M[k][j] = from_Int(Mz(k, j), (T*)nullptr);
    T B = from_Int(bound, (T*)nullptr);

    std::vector<std::vector<T>> out;
    std::vector<T> x(n, T(0)), P(n + 1, T(0)), hi(n), beta(n);
    std::vector<bool> top_zero(n + 1, true);  // all coordinates above k are zero
    auto init_level = [&](int lv) -> bool {
        T b = 0;
        for (int j = lv + 1; j < n; ++j) b += M[lv][j] * x[j];
        beta[lv] = b;
        T R = B * D[lv] * D[lv + 1] - D[lv] * P[lv + 1];
        if (R < 0) return false;
        T r = isqrt_t<T>(R);
        T lo = floor_div<T>(-r - b + D[lv + 1] - 1, D[lv + 1]);  // ceil((-r-b)/D)
        T up = floor_div<T>(r - b, D[lv + 1]);
        if (top_zero[lv + 1] && lo < 0) lo = 0;
        if (lo > up) return false;
        x[lv] = lo;
        hi[lv] = up;
        return true;
    };
    if (n == 0 || !init_level(n - 1)) return out;
    int k = n - 1;
    while (true) {
        T t = D[k + 1] * x[k] + beta[k];
        P[k] = (t * t + D[k] * P[k + 1]) / D[k + 1];
        top_zero[k] = top_zero[k + 1] && x[k] == 0;
        if (k == 0) {
            if (!top_zero[0]) out.push_back(x);
        } else if (init_level(k - 1)) {
            --k;
            continue;
        }
        while (k < n && x[k] >= hi[k]) ++k;
        if (k >= n) break;
        x[k] += 1;
    }
    return out;
}

}  // namespace

ZMat lll_transform(const ZMat& gram) {
    int n = gram.rows();
    ZMat G = gram, H = ZMat::identity(n);
    if (n <= 1) return H;
    // 1-based arrays as in the integral LLL of Cohen's book
    std::vector<Int> d(n + 1);
    std::vector<std::vector<Int>> lam(n + 1, std::vector<Int>(n + 1, Int(0)));
    auto b = [&](int i, int j) -> const Int& { return G(i - 1, j - 1); };
    d[0] = 1;
    d[1] = b(1, 1);
    int k = 2, kmax = 1;
    auto redi = [&](int kk, int l) {
        if (abs(2 * lam[kk][l]) > d[l]) {
            Int q = round_div(lam[kk][l], d[l]);
            add_multiple(G, H, kk - 1, l - 1, q);
            lam[kk][l] -= q * d[l];
            for (int i = 1; i <= l - 1; ++i) lam[kk][i] -= q * lam[l][i];
        }
    };
    auto swapi = [&](int kk) {
        swap_basis(G, H, kk - 1, kk - 2);
        for (int j = 1; j <= kk - 2; ++j) std::swap(lam[kk][j], lam[kk - 1][j]);
        Int l = lam[kk][kk - 1];
        Int B = (d[kk - 2] * d[kk] + l * l) / d[kk - 1];
        for (int i = kk + 1; i <= kmax; ++i) {
            Int t = lam[i][kk];
            lam[i][kk] = (d[kk] * lam[i][kk - 1] - l * t) / d[kk - 1];
            lam[i][kk - 1] = (B * t + l * lam[i][kk]) / d[kk];
        }
        d[kk - 1] = B;
    };
    while (k <= n) {
        if (k > kmax) {
            kmax = k;
            for (int j = 1; j <= k; ++j) {
                Int u = b(k, j);
                for (int i = 1; i <= j - 1; ++i) u = (d[i] * u - lam[k][i] * lam[j][i]) / d[i - 1];
                if (j < k)
                    lam[k][j] = u;
                else {
                    if (u <= 0) throw InputError("lattice is not positive definite");
                    d[k] = u;
                }
            }
        }
        redi(k, k - 1);
        if (4 * d[k] * d[k - 2] < 3 * d[k - 1] * d[k - 1] - 4 * lam[k][k - 1] * lam[k][k - 1]) {
            swapi(k);
            k = std::max(2, k - 1);
            continue;
        }
        for (int l = k - 2; l >= 1; --l) redi(k, l);
        ++k;
    }
    return H;
}

std::vector<ZVec> short_vectors_positive(const ZMat& gram, const Int& bound) {
    int n = gram.rows();
    std::vector<ZVec> res;
    if (n == 0 || bound <= 0) return res;
    ZMat T = lll_transform(gram);
    ZMat G = T * gram * T.transpose();
    // decide whether 128-bit arithmetic is safe
    Int maxD = 1, maxM = 0;
    {
        ZMat A = G;
        Int prev = 1;
        for (int k = 0; k < n; ++k) {
            for (int j = k; j < n; ++j) maxM = std::max(maxM, Int(abs(A(k, j))));
            Int dk = A(k, k);
            if (dk <= 0) throw InputError("lattice is not positive definite");
            maxD = std::max(maxD, dk);
            for (int i = k + 1; i < n; ++i)
                for (int j = k + 1; j < n; ++j) A(i, j) = (A(k, k) * A(i, j) - A(i, k) * A(k, j)) / prev;
            prev = dk;
        }
    }
    Int lim90 = Int(1) << 90, lim40 = Int(1) << 40;
    std::vector<std::vector<Int>> raw;
    if (bound * maxD * maxD < lim90 && maxM < lim40) {
        for (auto& v : enumerate<__int128>(G, bound)) {
            std::vector<Int> w(n);
            for (int i = 0; i < n; ++i) w[i] = to_Int(v[i]);
            raw.push_back(std::move(w));
        }
    } else {
        raw = enumerate<Int>(G, bound);
    }
    struct Item {
        Int norm;
        ZVec v;
    };
    std::vector<Item> items;
    items.reserve(raw.size());
    for (auto& y : raw) {
        ZVec v(n, Int(0));
        for (int i = 0; i < n; ++i)
            if (y[i] != 0)
                for (int j = 0; j < n; ++j) v[j] += y[i] * T(i, j);
        // normalize sign: first nonzero coordinate positive
        for (int j = 0; j < n; ++j)
            if (v[j] != 0) {
                if (v[j] < 0)
                    for (auto& c : v) c = -c;
                break;
            }
        Int nm = 0;
        for (int i = 0; i < n; ++i)
            if (v[i] != 0)
                for (int j = 0; j < n; ++j) nm += v[i] * gram(i, j) * v[j];
        items.push_back({nm, std::move(v)});
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.norm != b.norm) return a.norm < b.norm;
        return a.v < b.v;
    });
    for (auto& it : items) res.push_back(std::move(it.v));
    return res;
}

ZMat positive_gram(const GramLattice& L) {
    auto s = signature(L);
    if (s.first > 0 && s.second > 0) throw InputError("lattice is indefinite");
    ZMat G = L.gram();
    if (s.second > 0)
        for (int i = 0; i < G.rows(); ++i)
            for (int j = 0; j < G.cols(); ++j) G(i, j) = -G(i, j);
    return G;
}

std::vector<ZVec> short_vectors(const GramLattice& L, const Int& bound) {
    return short_vectors_positive(positive_gram(L), bound);
}

}  // namespace k3f
