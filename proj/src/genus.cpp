#include <algorithm>
#include <map>
#include <sstream>

#include <omp.h>

#include "k3f/genus.hpp"
#include "k3f/mass.hpp"

namespace k3f {

namespace {

bool is_prime(long p) {
    if (p < 2) return false;
    for (long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

int64_t mod_int(const Int& a, long m) {
    Int r;
    mpz_fdiv_r_ui(r.get_mpz_t(), a.get_mpz_t(), static_cast<unsigned long>(m));
    return r.get_si();
}

GramLattice with_sign(const ZMat& positive, bool negative) {
    if (!negative) return GramLattice(positive);
    ZMat g = positive;
    for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j) g(i, j) = -g(i, j);
    return GramLattice(g);
}

// Null space mod p of the rows of A (k x n): vectors v with A v^t = 0.
std::vector<std::vector<int64_t>> kernel_mod_p(std::vector<std::vector<int64_t>> A, int n, long p) {
    int rows = int(A.size());
    std::vector<int> pivcol;
    int r = 0;
    for (int c = 0; c < n && r < rows; ++c) {
        int piv = -1;
        for (int i = r; i < rows; ++i)
            if (A[i][c] % p) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        std::swap(A[r], A[piv]);
        int64_t inv = inv_mod(mod_floor(A[r][c], p), p);
        for (int j = 0; j < n; ++j) A[r][j] = mod_floor(A[r][j] * inv, p);
        for (int i = 0; i < rows; ++i) {
            if (i == r || A[i][c] % p == 0) continue;
            int64_t f = mod_floor(A[i][c], p);
            for (int j = 0; j < n; ++j) A[i][j] = mod_floor(A[i][j] - f * A[r][j], p);
        }
        pivcol.push_back(c);
        ++r;
    }
    std::vector<char> is_piv(n, 0);
    for (int c : pivcol) is_piv[c] = 1;
    std::vector<std::vector<int64_t>> basis;
    for (int f = 0; f < n; ++f) {
        if (is_piv[f]) continue;
        std::vector<int64_t> v(n, 0);
        v[f] = 1;
        for (int i = 0; i < r; ++i) v[pivcol[i]] = mod_floor(-A[i][f], p);
        basis.push_back(v);
    }
    return basis;
}

// Data of a known class used for neighbor sampling.
struct Sampler {
    ZMat G;                                   // positive Gram
    IMat Gmod;                                // G mod 2p for the current prime set (reduced lazily)
    std::vector<std::vector<int64_t>> roots;  // simple roots and highest roots, in coordinates
};

std::vector<std::vector<int64_t>> special_roots(const ZMat& G, const RootDatum& R) {
    std::vector<std::vector<int64_t>> out;
    int n = G.rows();
    auto ip = [&](const ZVec& a, const ZVec& b) {
        Int s = 0;
        for (int i = 0; i < n; ++i)
            if (a[i] != 0)
                for (int j = 0; j < n; ++j) s += a[i] * G(i, j) * b[j];
        return s;
    };
    for (int i = 0; i < R.simple_roots.rows(); ++i) {
        std::vector<int64_t> v(n);
        for (int j = 0; j < n; ++j) v[j] = R.simple_roots(i, j).get_si();
        out.push_back(v);
    }
    for (auto& c : R.components) {
        // greedy ascent to the highest root of the component
        ZVec theta = R.simple_roots.row(c.nodes[0]);
        bool changed = true;
        while (changed) {
            changed = false;
            for (int node : c.nodes) {
                ZVec a = R.simple_roots.row(node);
                if (ip(theta, a) == -1) {
                    for (int j = 0; j < n; ++j) theta[j] += a[j];
                    changed = true;
                }
            }
        }
        std::vector<int64_t> v(n);
        for (int j = 0; j < n; ++j) v[j] = theta[j].get_si();
        out.push_back(v);
    }
    return out;
}

// Random v mod p with v^2 = 0 mod 2p, optionally orthogonal mod p to a random subset of roots.
std::optional<ZVec> sample_isotropic(const Sampler& S, long p, std::mt19937_64& rng) {
    int n = S.G.rows();
    std::vector<std::vector<int64_t>> basis;
    std::uniform_int_distribution<long> coef(0, p - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    bool biased = !S.roots.empty() && (rng() & 1);
    if (biased) {
        static const double levels[] = {0.5, 0.7, 0.85, 0.95, 1.0};
        double keep = levels[rng() % 5];
        std::vector<std::vector<int64_t>> A;
        for (auto& r : S.roots) {
            if (unit(rng) >= keep) continue;
            std::vector<int64_t> row(n, 0);
            for (int i = 0; i < n; ++i)
                if (r[i])
                    for (int j = 0; j < n; ++j) row[j] = mod_floor(row[j] + r[i] * mod_int(S.G(i, j), p), p);
            A.push_back(row);
        }
        basis = kernel_mod_p(A, n, p);
        if (basis.empty()) return std::nullopt;
    }
    int64_t twop = 2 * p;
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<int64_t> v(n, 0);
        if (biased) {
            for (auto& b : basis) {
                int64_t c = coef(rng);
                if (c)
                    for (int j = 0; j < n; ++j) v[j] = (v[j] + c * b[j]) % p;
            }
        } else {
            for (int j = 0; j < n; ++j) v[j] = coef(rng);
        }
        if (std::all_of(v.begin(), v.end(), [](int64_t x) { return x == 0; })) continue;
        int64_t s = 0;
        for (int i = 0; i < n; ++i) {
            if (!v[i]) continue;
            int64_t t = 0;
            for (int j = 0; j < n; ++j) t = (t + S.Gmod(i, j) * v[j]) % twop;
            s = (s + v[i] * t) % twop;
        }
        if (s != 0) continue;
        ZVec z(n);
        for (int j = 0; j < n; ++j) z[j] = v[j];
        return z;
    }
    return std::nullopt;
}

// Cheap isometry invariants of a class.
struct ClassKey {
    std::string symbol, mw;
    Int cdet, cmin;
    uint64_t cmin_count = 0;
    bool operator<(const ClassKey& o) const {
        return std::tie(symbol, mw, cdet, cmin, cmin_count) < std::tie(o.symbol, o.mw, o.cdet, o.cmin, o.cmin_count);
    }
    bool operator==(const ClassKey& o) const {
        return symbol == o.symbol && mw == o.mw && cdet == o.cdet && cmin == o.cmin && cmin_count == o.cmin_count;
    }
};

ClassKey class_key(const RootDecomposition& D, const MordellWeil& mw) {
    ClassKey k;
    k.symbol = D.R.symbol();
    k.mw = mw.str();
    const ZMat& GC = D.GC;
    k.cdet = determinant(GC);
    if (GC.rows() > 0) {
        ZMat T = lll_transform(GC);
        ZMat Gr = T * GC * T.transpose();
        Int b = Gr(0, 0);
        for (int i = 1; i < Gr.rows(); ++i) b = std::min(b, Gr(i, i));
        auto sv = short_vectors_positive(Gr, b);
        Int mn = b;
        for (auto& v : sv) {
            Int nm = 0;
            for (int i = 0; i < Gr.rows(); ++i)
                for (int j = 0; j < Gr.rows(); ++j) nm += v[i] * Gr(i, j) * v[j];
            if (nm < mn) {
                mn = nm;
                k.cmin_count = 0;
            }
            if (nm == mn) ++k.cmin_count;
        }
        k.cmin = mn;
    }
    return k;
}

struct Candidate {
    bool ok = false;
    RootDecomposition dec;
    MordellWeil mw;
    ClassKey key;
    int match = -1;  // index of an isometric known class
};

}  // namespace

std::string GenusDescriptor::describe() const {
    std::ostringstream out;
    out << "signature (" << n_plus << "," << n_minus << "), det " << det << ", discriminant " << q.describe();
    return out.str();
}

GenusDescriptor genus_descriptor(const GramLattice& L) {
    if (!L.is_even()) throw InputError("lattice is not even");
    GenusDescriptor g;
    auto s = signature(L);
    g.n_plus = s.first;
    g.n_minus = s.second;
    g.det = L.det();
    g.q = discriminant_form(L).q;
    return g;
}

GenusDescriptor frame_genus_descriptor(const GramLattice& T) {
    if (!T.is_even()) throw InputError("transcendental lattice must be even");
    int r = T.rank();
    if (r < 1 || r > 20) throw InputError("transcendental lattice must have rank between 1 and 20");
    auto s = signature(T);
    if (s.first != 2 || s.second != r - 2)
        throw InputError("transcendental lattice must have signature (2, rank - 2)");
    GenusDescriptor g;
    g.n_plus = 0;
    g.n_minus = 20 - r;
    g.q = discriminant_form(T).q.negated();
    Int d = abs(T.det());
    g.det = (g.n_minus % 2) ? Int(-d) : d;
    return g;
}

bool in_genus(const GramLattice& L, const GenusDescriptor& g) {
    if (!L.is_even() || L.rank() != g.rank() || L.det() != g.det) return false;
    auto s = signature(L);
    if (s.first != g.n_plus || s.second != g.n_minus) return false;
    return are_isometric(discriminant_form(L).q, g.q).has_value();
}

bool in_same_genus(const GramLattice& a, const GramLattice& b) { return in_genus(b, genus_descriptor(a)); }

GramLattice neighbor(const GramLattice& L, const ZVec& v0, long p) {
    int n = L.rank();
    const ZMat& G = L.gram();
    if (!is_prime(p)) throw InputError("neighbor prime must be prime");
    if (mod_int(L.det(), p) == 0) throw InputError("neighbor prime divides the determinant");
    ZVec v = v0;
    auto Gv = [&](const ZVec& x) {
        ZVec u(n, Int(0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) u[i] += G(i, j) * x[j];
        return u;
    };
    auto norm = [&](const ZVec& x, const ZVec& gx) {
        Int s = 0;
        for (int i = 0; i < n; ++i) s += x[i] * gx[i];
        return s;
    };
    ZVec u = Gv(v);
    Int vv = norm(v, u);
    if (mod_int(vv, 2 * p) != 0) throw InputError("neighbor vector is not isotropic mod p");
    int j = -1;
    for (int i = 0; i < n; ++i)
        if (mod_int(u[i], p) != 0) {
            j = i;
            break;
        }
    if (j < 0) throw InputError("neighbor vector lies in pL");
    // lift so that v^2 = 0 mod 2p^2
    {
        int64_t a = mod_int(vv / (2 * p), p);
        int64_t t = mod_floor(-a * inv_mod(mod_int(u[j], p), p), p);
        v[j] += Int(p) * t;
        u = Gv(v);
        vv = norm(v, u);
        if (mod_int(vv, 2 * p * p) != 0) throw InternalError("neighbor lift failed");
    }
    int64_t uj_inv = inv_mod(mod_int(u[j], p), p);
    // rows of p * L_v together with v
    ZMat B(n + 1, n, Int(0));
    for (int i = 0; i < n; ++i) {
        if (i == j) {
            B(i, j) = Int(p) * p;
            continue;
        }
        int64_t c = mod_floor(mod_int(u[i], p) * uj_inv, p);
        B(i, i) = p;
        B(i, j) = Int(-p) * c;
    }
    for (int k = 0; k < n; ++k) B(n, k) = v[k];
    ZMat H = hnf_rows(B);
    if (H.rows() != n) throw InternalError("neighbor lattice has wrong rank");
    ZMat M = H * G * H.transpose();
    Int p2 = Int(p) * p;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (M(a, b) % p2 != 0) throw InternalError("neighbor Gram is not integral");
            M(a, b) /= p2;
        }
    GramLattice N(M);
    if (!N.is_even()) throw InternalError("neighbor is not even");
    bool negative = signature(L).second > 0;
    ZMat P = positive_gram(N);
    ZMat T = lll_transform(P);
    return with_sign(T * P * T.transpose(), negative);
}

std::vector<GramLattice> neighbors(const GramLattice& L, long p, uint64_t max_lines) {
    int n = L.rank();
    std::vector<GramLattice> out;
    if (n == 0) return out;
    ZMat G = L.gram();
    // lines as vectors whose first nonzero coordinate is 1
    std::vector<int64_t> v(n, 0);
    uint64_t lines = 0;
    for (int lead = 0; lead < n; ++lead) {
        std::fill(v.begin(), v.end(), 0);
        v[lead] = 1;
        while (true) {
            Int s = 0;
            for (int a = 0; a < n; ++a)
                if (v[a])
                    for (int b = 0; b < n; ++b)
                        if (v[b]) s += G(a, b) * v[a] * v[b];
            if (mod_int(s, 2 * p) == 0) {
                if (++lines > max_lines) throw ResourceCap("too many isotropic lines for an exhaustive neighbor list");
                ZVec z(n);
                for (int k = 0; k < n; ++k) z[k] = v[k];
                out.push_back(neighbor(L, z, p));
            }
            int k = n - 1;
            while (k > lead && v[k] == p - 1) v[k--] = 0;
            if (k == lead) break;
            ++v[k];
        }
    }
    return out;
}

GenusClass describe_class(const GramLattice& W, const SearchOptions& opt) {
    GenusClass c;
    c.lattice = W;
    c.decomposition = root_decomposition(W);
    c.roots = c.decomposition.R;
    c.mw = mordell_weil(W, c.roots);
    c.aut = automorphism_group(c.decomposition, opt);
    return c;
}

void sort_classes(std::vector<GenusClass>& classes) {
    std::stable_sort(classes.begin(), classes.end(), [](const GenusClass& a, const GenusClass& b) {
        if (a.mw.free_rank != b.mw.free_rank) return a.mw.free_rank < b.mw.free_rank;
        if (a.mw.torsion != b.mw.torsion) return a.mw.torsion < b.mw.torsion;
        if (a.roots.root_count != b.roots.root_count) return a.roots.root_count < b.roots.root_count;
        if (a.aut.order != b.aut.order) return a.aut.order < b.aut.order;
        return a.roots.symbol() < b.roots.symbol();
    });
}

GenusList enumerate_genus(const GramLattice& seed, const WalkOptions& opt) {
    GenusList out;
    out.descriptor = genus_descriptor(seed);
    auto sig = signature(seed);
    if (sig.first > 0 && sig.second > 0) throw InputError("genus enumeration needs a definite lattice");
    out.expected_mass = mass(seed);
    auto say = [&](const std::string& s) {
        if (opt.progress) opt.progress(s);
    };

    std::vector<long> pool = opt.primes;
    if (pool.empty()) {
        for (long p = 3; int(pool.size()) < opt.max_primes; p += 2)
            if (is_prime(p) && mod_int(out.descriptor.det, p) != 0) pool.push_back(p);
    }
    for (long p : pool)
        if (!is_prime(p) || mod_int(out.descriptor.det, p) == 0)
            throw InputError("neighbor prime " + std::to_string(p) + " is not a prime coprime to the determinant");
    size_t active = opt.primes.empty() ? 1 : pool.size();

    // reduced seed
    bool negative = sig.second > 0;
    GramLattice start = seed;
    if (seed.rank() > 0) {
        ZMat P = positive_gram(seed);
        ZMat T = lll_transform(P);
        start = with_sign(T * P * T.transpose(), negative);
    }
    std::vector<GenusClass> classes;
    std::vector<ClassKey> keys;
    std::vector<Sampler> samplers;
    auto add_class = [&](GenusClass c) {
        keys.push_back(class_key(c.decomposition, c.mw));
        Sampler s;
        s.G = positive_gram(c.lattice);
        s.roots = special_roots(s.G, c.roots);
        samplers.push_back(std::move(s));
        out.mass += Rat(1) / Rat(c.aut.order);
        classes.push_back(std::move(c));
    };
    add_class(describe_class(start, opt.search));

    auto prepare = [&](long p) {
        for (auto& s : samplers) {
            int n = s.G.rows();
            s.Gmod = IMat(n, n, 0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) s.Gmod(i, j) = mod_int(s.G(i, j), 2 * p);
        }
    };

    uint64_t round = 0;
    int stall = 0;
    while (out.mass < out.expected_mass && seed.rank() > 0) {
        size_t known = classes.size();
        long p = pool[round % active];
        prepare(p);
        std::vector<Candidate> cand(opt.batch);
#pragma omp parallel for schedule(dynamic, 1)
        for (int i = 0; i < opt.batch; ++i) {
            std::mt19937_64 rng(mix(opt.seed ^ mix(round * 1000003ULL + uint64_t(i))));
            size_t src = rng() % known;
            auto v = sample_isotropic(samplers[src], p, rng);
            if (!v) continue;
            Candidate& c = cand[i];
            c.dec = root_decomposition(neighbor(classes[src].lattice, *v, p));
            c.mw = mordell_weil(c.dec.lattice, c.dec.R);
            c.key = class_key(c.dec, c.mw);
            for (size_t k = 0; k < known && c.match < 0; ++k)
                if (keys[k] == c.key && isometric(c.dec, classes[k].decomposition, opt.search)) c.match = int(k);
            c.ok = true;
        }
        // merge in sample order
        std::vector<GramLattice> fresh;
        for (auto& c : cand) {
            if (!c.ok) continue;
            ++out.neighbors_built;
            if (c.match >= 0) continue;
            bool dup = false;
            for (size_t k = known; k < classes.size() && !dup; ++k)
                dup = keys[k] == c.key && isometric(c.dec, classes[k].decomposition, opt.search).has_value();
            if (dup) continue;
            if (!in_genus(c.dec.lattice, out.descriptor)) throw InternalError("neighbor left the genus");
            add_class(describe_class(c.dec.lattice, opt.search));
            say("class " + std::to_string(classes.size()) + ": " + c.key.symbol + ", MW " + c.key.mw +
                ", |O| = " + classes.back().aut.order.get_str() + ", mass " +
                Rat(out.mass / out.expected_mass).get_str() + " of total");
        }
        ++round;
        if (out.mass > out.expected_mass)
            throw MassCheckFailure("mass of the classes found exceeds the analytic mass");
        if (classes.size() > known) {
            stall = 0;
            continue;
        }
        if (++stall >= opt.stall_rounds) {
            stall = 0;
            if (active < pool.size()) {
                ++active;
                say("adding neighbor prime " + std::to_string(pool[active - 1]));
            } else {
                throw MassCheckFailure("genus walk incomplete; try additional primes");
            }
        }
    }
    out.primes.assign(pool.begin(), pool.begin() + long(active));
    sort_classes(classes);
    out.classes = std::move(classes);
    return out;
}

}  // namespace k3f
