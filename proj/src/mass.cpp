#include "k3f/mass.hpp"

#include <algorithm>
#include <climits>

namespace k3f {

namespace {

// r * sqrt(rad) with rad squarefree and positive.
struct Surd {
    Rat r{1};
    Int rad{1};

    Surd& operator*=(const Surd& o) {
        Int g;
        mpz_gcd(g.get_mpz_t(), rad.get_mpz_t(), o.rad.get_mpz_t());
        rad = rad / g * (o.rad / g);
        r *= o.r * g;
        return *this;
    }
    Surd& operator*=(const Rat& x) {
        r *= x;
        return *this;
    }
};

Rat rpow(long p, long e) {
    Int a;
    mpz_ui_pow_ui(a.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e < 0 ? -e : e));
    return e < 0 ? Rat(Int(1), a) : Rat(a);
}

Int factorial(long n) {
    Int f;
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(n));
    return f;
}

Int binomial(long n, long k) {
    Int b;
    mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return b;
}

int valuation(const Rat& x, long p) {
    if (x == 0) throw InternalError("valuation of zero");
    Int pp(p), t;
    int vn = int(mpz_remove(t.get_mpz_t(), x.get_num_mpz_t(), pp.get_mpz_t()));
    int vd = int(mpz_remove(t.get_mpz_t(), x.get_den_mpz_t(), pp.get_mpz_t()));
    return vn - vd;
}

// Residue of a rational with odd denominator modulo m (m a power of two).
long residue2(const Rat& x, long m) {
    Int n = x.get_num() * x.get_den();  // den^2 is 1 mod 8
    Int r;
    mpz_fdiv_r_ui(r.get_mpz_t(), n.get_mpz_t(), static_cast<unsigned long>(m));
    return r.get_si();
}

int kronecker(const Int& a, const Int& n) { return mpz_kronecker(a.get_mpz_t(), n.get_mpz_t()); }

std::vector<long> prime_divisors(Int n) {
    n = abs(n);
    std::vector<long> ps;
    for (long p = 2; p <= 1000000 && Int(p) * p <= n; ++p) {
        if (n % p != 0) continue;
        ps.push_back(p);
        while (n % p == 0) n /= p;
    }
    if (n > 1) {
        if (!n.fits_slong_p() || mpz_probab_prime_p(n.get_mpz_t(), 40) == 0)
            throw ResourceCap("determinant too large to factor");
        ps.push_back(n.get_si());
    }
    return ps;
}

// Squarefree part with sign, and the fundamental discriminant of d.
Int squarefree_part(const Int& d) {
    Int s = d < 0 ? Int(-1) : Int(1);
    for (long p : prime_divisors(d)) {
        Int t(abs(d));
        int e = 0;
        while (t % p == 0) t /= p, ++e;
        if (e % 2) s *= p;
    }
    return s;
}

Int fundamental_discriminant(const Int& d) {
    Int s = squarefree_part(d);
    Int r;
    mpz_fdiv_r_ui(r.get_mpz_t(), s.get_mpz_t(), 4);
    return r == 1 ? s : Int(4 * s);
}

// Value of the Bernoulli polynomial B_k at x.
Rat bernoulli_poly(int k, const Rat& x, const std::vector<Rat>& B) {
    Rat s = 0, xp = 1;
    for (int j = k; j >= 0; --j) {
        s += Rat(binomial(k, j)) * B[j] * xp;
        xp *= x;
    }
    return s;
}

// L(s, chi) for the character of fundamental discriminant d0 with chi(-1) = (-1)^s.
Surd quadratic_L(int s, const Int& d0, const std::vector<Rat>& B, long& pi_half_powers) {
    Int f = abs(d0);
    if (f.get_si() > 100000000) throw ResourceCap("discriminant conductor too large");
    long fl = f.get_si();
    Rat bk = 0;
    for (long a = 1; a <= fl; ++a) {
        int chi = kronecker(d0, Int(a));
        if (chi) bk += chi * bernoulli_poly(s, Rat(Int(a), f), B);
    }
    Int fp;
    mpz_pow_ui(fp.get_mpz_t(), f.get_mpz_t(), static_cast<unsigned long>(s - 1));
    bk *= fp;
    int delta = d0 < 0 ? 1 : 0;
    if ((s - delta) % 2) throw InternalError("character parity mismatch");
    int sign = ((1 + (s - delta) / 2) % 2) ? -1 : 1;
    Surd v;
    v.r = Rat(sign) * Rat(1, 2) * rpow(2, s) / Rat(fp * f) * bk / Rat(factorial(s));
    // sqrt(f) with f = |d0|, d0 squarefree or 4 * squarefree
    if (f % 4 == 0) {
        v.r *= 2;
        v.rad = f / 4;
    } else {
        v.rad = f;
    }
    pi_half_powers += 2 * s;
    return v;
}

Surd standard_mass(int n, const Int& D, const std::vector<Rat>& B) {
    int s = (n + 1) / 2;
    long pi_half = -(long(n) * (n + 1)) / 2;  // pi^(-n(n+1)/4) in units of pi^(1/2)
    Surd m;
    m.r = 2;
    for (int j = 1; j <= n; ++j) {
        if (j % 2 == 0) {
            m.r *= Rat(factorial(j / 2 - 1));
        } else {
            long k = (j - 1) / 2;  // Gamma(k + 1/2) = (2k)! / (4^k k!) sqrt(pi)
            Int q;
            mpz_ui_pow_ui(q.get_mpz_t(), 4, static_cast<unsigned long>(k));
            m.r *= Rat(factorial(2 * k), q * factorial(k));
            pi_half += 1;
        }
    }
    for (int k = 1; k < s; ++k) {
        // zeta(2k) = (-1)^(k+1) B_2k (2 pi)^2k / (2 (2k)!)
        Rat z = B[2 * k] * rpow(2, 2 * k) / Rat(2 * factorial(2 * k));
        if (k % 2 == 0) z = -z;
        m.r *= z;
        pi_half += 4 * k;
    }
    if (n % 2 == 0) m *= quadratic_L(s, fundamental_discriminant(D), B, pi_half);
    if (pi_half != 0) throw InternalError("powers of pi do not cancel");
    return m;
}

Rat standard_p_mass(int n, const Int& D, long p) {
    int s = (n + 1) / 2;
    Rat inv = 2;
    for (int i = 2; i < 2 * s; i += 2) inv *= 1 - rpow(p, -i);
    if (n % 2 == 0) inv *= 1 - kronecker(fundamental_discriminant(D), Int(p)) * rpow(p, -s);
    return 1 / inv;
}

int legendre(const Rat& unit, long p) { return kronecker(unit.get_num() * unit.get_den(), Int(p)); }

std::vector<int> species_list(const std::vector<JordanBlock>& J, long p) {
    std::vector<int> sp;
    if (p != 2) {
        for (auto& b : J) {
            int n = b.dim;
            if (n % 2) {
                sp.push_back(n);
            } else {
                Rat d = b.det;
                if ((n / 2) % 2) d = -d;
                sp.push_back(n ? legendre(d, p) * n : 0);
            }
        }
        return sp;
    }
    int m = int(J.size());
    if (J[0].odd) sp.push_back(1);
    for (int i = 0; i < m; ++i) {
        int d = J[i].dim;
        int two_t = J[i].odd ? 2 * ((d - 1) / 2) : d;
        bool bound = (i > 0 && J[i - 1].odd) || (i + 1 < m && J[i + 1].odd);
        int o = J[i].octane;
        if (bound || o == 2 || o == 6)
            sp.push_back(two_t + 1);
        else if (o == 0 || o == 1 || o == 7)
            sp.push_back(two_t);
        else
            sp.push_back(-two_t);
    }
    if (J.back().odd) sp.push_back(1);
    return sp;
}

Rat diagonal_factor(const std::vector<int>& species, long p) {
    Rat f = 1;
    for (int s : species) {
        if (s == 0) continue;
        int a = s < 0 ? -s : s;
        Rat den = 2;
        for (int i = 2; i < a; i += 2) den *= 1 - rpow(p, -i);
        if (a % 2 == 0) den *= 1 - (s > 0 ? 1 : -1) * rpow(p, -a / 2);
        f /= den;
    }
    return f;
}

Surd p_mass(const std::vector<JordanBlock>& J, long p) {
    Surd m;
    m.r = diagonal_factor(species_list(J, p), p);
    long cross = 0;
    for (size_t i = 0; i < J.size(); ++i)
        for (size_t j = 0; j < i; ++j) cross += long(i - j) * J[i].dim * J[j].dim;
    m.r *= rpow(p, cross / 2);
    if (cross % 2) {
        Surd h;
        h.rad = p;
        m *= h;
    }
    if (p == 2) {
        long n2 = 0, n11 = 0;
        for (size_t i = 0; i < J.size(); ++i) {
            if (!J[i].odd) n2 += J[i].dim;
            if (i + 1 < J.size() && J[i].odd && J[i + 1].odd) ++n11;
        }
        m.r *= rpow(2, n11 - n2);
    }
    return m;
}

}  // namespace

std::vector<Rat> bernoulli_numbers(int n) {
    std::vector<Rat> B(n + 1);
    B[0] = 1;
    for (int m = 1; m <= n; ++m) {
        Rat s = 0;
        for (int k = 0; k < m; ++k) s += Rat(binomial(m + 1, k)) * B[k];
        B[m] = -s / (m + 1);
    }
    return B;
}

std::vector<JordanBlock> jordan_decomposition(const ZMat& gram, long p) {
    int n = gram.rows();
    QMat M = to_rat(gram);
    std::vector<int> active(n);
    for (int i = 0; i < n; ++i) active[i] = i;

    struct Piece {
        int scale;
        std::vector<Rat> unit;  // a, or a, b, c for a 2x2 piece
    };
    std::vector<Piece> pieces;

    auto eliminate = [&](const std::vector<int>& piv) {
        std::vector<int> rest;
        for (int k : active)
            if (std::find(piv.begin(), piv.end(), k) == piv.end()) rest.push_back(k);
        if (piv.size() == 1) {
            int i = piv[0];
            for (int k : rest)
                for (int l : rest) M(k, l) -= M(k, i) * M(i, l) / M(i, i);
        } else {
            int i = piv[0], j = piv[1];
            Rat a = M(i, i), b = M(i, j), c = M(j, j), det = a * c - b * b;
            // inverse of [[a,b],[b,c]] is [[c,-b],[-b,a]] / det
            for (int k : rest) {
                Rat x = (M(k, i) * c - M(k, j) * b) / det, y = (M(k, j) * a - M(k, i) * b) / det;
                for (int l : rest) M(k, l) -= x * M(i, l) + y * M(j, l);
            }
        }
        active = rest;
    };

    while (!active.empty()) {
        int best = INT_MAX;
        for (int i : active)
            for (int j : active)
                if (M(i, j) != 0) best = std::min(best, valuation(M(i, j), p));
        if (best == INT_MAX) throw InputError("degenerate lattice");
        int diag = -1;
        for (int i : active)
            if (M(i, i) != 0 && valuation(M(i, i), p) == best) {
                diag = i;
                break;
            }
        Rat scale = rpow(p, best);
        if (diag < 0) {
            int pi = -1, pj = -1;
            for (int i : active)
                for (int j : active)
                    if (pi < 0 && i != j && M(i, j) != 0 && valuation(M(i, j), p) == best) pi = i, pj = j;
            if (p == 2) {
                pieces.push_back({best, {M(pi, pi) / scale, M(pi, pj) / scale, M(pj, pj) / scale}});
                eliminate({pi, pj});
                continue;
            }
            // odd p: x_i -> x_i + x_j makes the diagonal entry minimal
            Rat dii = M(pi, pi) + 2 * M(pi, pj) + M(pj, pj);
            for (int l : active) M(pi, l) += M(pj, l);
            for (int l : active) M(l, pi) = M(pi, l);
            M(pi, pi) = dii;
            diag = pi;
        }
        pieces.push_back({best, {M(diag, diag) / scale}});
        eliminate({diag});
    }

    int smax = 0;
    for (auto& pc : pieces) smax = std::max(smax, pc.scale);
    if (!pieces.empty() && std::min_element(pieces.begin(), pieces.end(), [](auto& a, auto& b) {
                               return a.scale < b.scale;
                           })->scale < 0)
        throw InternalError("negative Jordan scale");
    std::vector<JordanBlock> J(n ? smax + 1 : 0);
    std::vector<int> sign_sum(J.size(), 0), disc5(J.size(), 0);
    for (size_t k = 0; k < J.size(); ++k) {
        J[k].scale = int(k);
        J[k].det = 1;
    }
    for (auto& pc : pieces) {
        JordanBlock& b = J[pc.scale];
        if (pc.unit.size() == 1) {
            b.dim += 1;
            b.det *= pc.unit[0];
            b.odd = b.odd || p == 2;
            if (p == 2) sign_sum[pc.scale] += residue2(pc.unit[0], 4) == 1 ? 1 : -1;
        } else {
            b.dim += 2;
            Rat d = pc.unit[0] * pc.unit[2] - pc.unit[1] * pc.unit[1];
            b.det *= d;
            if (residue2(-d, 8) == 5) ++disc5[pc.scale];
        }
    }
    if (p == 2) {
        for (size_t k = 0; k < J.size(); ++k) {
            if (J[k].odd) {
                J[k].octane = int(((sign_sum[k] + 4 * disc5[k]) % 8 + 8) % 8);
            } else {
                long r = residue2(J[k].det, 8);
                J[k].octane = (r == 1 || r == 7) ? 0 : 4;
            }
        }
    }
    return J;
}

Rat mass(const GramLattice& L) {
    int n = L.rank();
    if (n == 0) return 1;
    if (!L.is_even()) throw InputError("mass requires an even lattice");
    auto sig = signature(L);
    if (n == 1) return Rat(1, 2);  // single class [a] with O = {1, -1}
    ZMat G = L.gram();
    if (sig.first == 0) {
        for (auto i = 0; i < n; ++i)
            for (auto j = 0; j < n; ++j) G(i, j) = -G(i, j);
    } else if (sig.second != 0) {
        throw InputError("mass requires a definite lattice");
    }
    Int det = determinant(G);
    int s = (n + 1) / 2;
    Int D = (s % 2 ? -det : det);
    std::vector<Rat> B = bernoulli_numbers(n + 2);
    Surd m = standard_mass(n, D, B);
    std::vector<long> primes = prime_divisors(2 * det);
    for (long p : primes) {
        m *= p_mass(jordan_decomposition(G, p), p);
        m *= 1 / standard_p_mass(n, D, p);
    }
    if (m.rad != 1) throw InternalError("mass is not rational");
    return abs(m.r);
}

}  // namespace k3f
