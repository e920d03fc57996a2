#include "k3f/counting.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <numeric>
#include <set>

#include "k3f/definite.hpp"

namespace k3f {

namespace {

using i128 = __int128;

int64_t to_i64(const Int& x) {
    if (!x.fits_slong_p()) throw ResourceCap("matrix entry does not fit in 64 bits");
    return x.get_si();
}

// Coefficients of the n-th cyclotomic polynomial, lowest degree first.
std::vector<int64_t> cyclotomic(long n) {
    std::vector<int64_t> p(n + 1, 0);
    p[0] = -1;
    p[n] = 1;
    for (long d = 1; d < n; ++d) {
        if (n % d) continue;
        auto q = cyclotomic(d);
        // exact division of p by the monic q
        int dq = int(q.size()) - 1;
        std::vector<int64_t> quot(p.size() - dq, 0);
        for (int i = int(p.size()) - 1; i >= dq; --i) {
            int64_t c = p[i];
            quot[i - dq] = c;
            for (int j = 0; j <= dq; ++j) p[i - dq + j] -= c * q[j];
        }
        p = quot;
    }
    return p;
}

// Row-by-row search for integral A with A T A^t = T and Phi_n(A) = 0.
struct LiftProblem {
    int r = 0;
    std::vector<int64_t> T;  // r*r
    long n = 2;
    std::vector<int64_t> phi;
    bool quadratic = false;  // deg Phi_n = 2: (A T) + (A T)^t = c T
    int64_t c = 0;
    int64_t B = 10;
    uint64_t cap = 0;  // partial lifts visited before giving up, 0 for no limit
    mutable std::atomic<uint64_t> visited{0};

    int64_t t(int i, int j) const { return T[size_t(i) * r + j]; }
};

struct Echelon {
    bool feasible = true;
    std::vector<int> pivot_col;
    std::vector<std::vector<i128>> rows;  // r coefficients and the right hand side
    std::vector<int> free_cols;
};

i128 abs128(i128 x) { return x < 0 ? -x : x; }

i128 gcd128(i128 a, i128 b) {
    a = abs128(a);
    b = abs128(b);
    while (b) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Echelon echelon(std::vector<std::vector<i128>> rows, int r) {
    Echelon E;
    int top = 0;
    for (int col = 0; col < r && top < int(rows.size()); ++col) {
        int piv = -1;
        for (int i = top; i < int(rows.size()); ++i)
            if (rows[i][col] != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        std::swap(rows[piv], rows[top]);
        for (int i = 0; i < int(rows.size()); ++i) {
            if (i == top || rows[i][col] == 0) continue;
            i128 a = rows[top][col], b = rows[i][col];
            i128 g = gcd128(a, b);
            i128 g0 = 0;
            for (int j = 0; j <= r; ++j) {
                rows[i][j] = rows[i][j] * (a / g) - rows[top][j] * (b / g);
                g0 = gcd128(g0, rows[i][j]);
            }
            if (g0 > 1)
                for (auto& x : rows[i]) x /= g0;
        }
        if (rows[top][col] < 0)
            for (auto& x : rows[top]) x = -x;
        E.pivot_col.push_back(col);
        ++top;
    }
    for (int i = top; i < int(rows.size()); ++i)
        if (rows[i][r] != 0) E.feasible = false;
    rows.resize(top);
    E.rows = std::move(rows);
    std::vector<char> is_pivot(r, 0);
    for (int c : E.pivot_col) is_pivot[c] = 1;
    for (int c = 0; c < r; ++c)
        if (!is_pivot[c]) E.free_cols.push_back(c);
    return E;
}

class LiftSearcher {
public:
    LiftSearcher(const LiftProblem& P) : P_(P), A_(size_t(P.r) * P.r, 0), S_(size_t(P.r) * P.r, 0) {}

    // Candidate rows for row i given rows 0..i-1.
    template <class F>
    void rows_for(int i, F&& visit) {
        int r = P_.r;
        std::vector<std::vector<i128>> M;
        for (int j = 0; j < i; ++j) {
            std::vector<i128> row(r + 1);
            for (int k = 0; k < r; ++k) row[k] = S_[size_t(j) * r + k];
            row[r] = P_.t(i, j);
            M.push_back(row);
        }
        if (P_.quadratic) {
            for (int j = 0; j <= i; ++j) {
                std::vector<i128> row(r + 1);
                for (int k = 0; k < r; ++k) row[k] = P_.t(k, j);
                row[r] = j < i ? P_.c * P_.t(i, j) - S_[size_t(j) * r + i] : P_.c * P_.t(i, i) / 2;
                M.push_back(row);
            }
        }
        Echelon E = echelon(std::move(M), r);
        if (!E.feasible) return;
        int f = int(E.free_cols.size());
        std::vector<int64_t> x(r, 0);
        std::vector<int64_t> fv(f, -P_.B);
        while (true) {
            for (int k = 0; k < f; ++k) x[E.free_cols[k]] = fv[k];
            bool ok = true;
            for (size_t p = 0; p < E.rows.size() && ok; ++p) {
                const auto& row = E.rows[p];
                i128 num = row[r];
                for (int k = 0; k < f; ++k) num -= row[E.free_cols[k]] * fv[k];
                i128 d = row[E.pivot_col[p]];
                if (num % d != 0) {
                    ok = false;
                    break;
                }
                i128 v = num / d;
                if (v > P_.B || v < -P_.B) ok = false;
                x[E.pivot_col[p]] = int64_t(v);
            }
            if (ok) {
                i128 nrm = 0;
                for (int a = 0; a < r; ++a) {
                    if (!x[a]) continue;
                    i128 s = 0;
                    for (int b = 0; b < r; ++b) s += i128(P_.t(a, b)) * x[b];
                    nrm += s * x[a];
                }
                if (nrm == P_.t(i, i)) visit(x);
            }
            int k = 0;
            while (k < f && fv[k] == P_.B) fv[k++] = -P_.B;
            if (k == f) break;
            ++fv[k];
        }
    }

    void set_row(int i, const std::vector<int64_t>& x) {
        int r = P_.r;
        for (int k = 0; k < r; ++k) A_[size_t(i) * r + k] = x[k];
        for (int k = 0; k < r; ++k) {
            int64_t s = 0;
            for (int a = 0; a < r; ++a) s += x[a] * P_.t(a, k);
            S_[size_t(i) * r + k] = s;
        }
    }

    template <class F>
    void descend(int i, F& leaf) {
        if (i == P_.r) {
            if (annihilated()) leaf(A_);
            return;
        }
        rows_for(i, [&](const std::vector<int64_t>& x) {
            if (P_.cap && ++P_.visited > P_.cap) return;
            set_row(i, x);
            descend(i + 1, leaf);
        });
    }

private:
    bool annihilated() const {
        int r = P_.r;
        std::vector<i128> acc(size_t(r) * r, 0), pw(size_t(r) * r, 0), nxt(size_t(r) * r);
        for (int i = 0; i < r; ++i) pw[size_t(i) * r + i] = 1;
        for (size_t d = 0; d < P_.phi.size(); ++d) {
            if (d > 0) {
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < r; ++j) {
                        i128 s = 0;
                        for (int k = 0; k < r; ++k) s += pw[size_t(i) * r + k] * A_[size_t(k) * r + j];
                        nxt[size_t(i) * r + j] = s;
                    }
                pw.swap(nxt);
            }
            for (size_t e = 0; e < acc.size(); ++e) acc[e] += P_.phi[d] * pw[e];
        }
        for (auto v : acc)
            if (v != 0) return false;
        return true;
    }

    const LiftProblem& P_;
    std::vector<int64_t> A_, S_;
};

void make_problem(LiftProblem& P, const GramLattice& T, long n, int bound) {
    P.r = T.rank();
    for (int i = 0; i < P.r; ++i)
        for (int j = 0; j < P.r; ++j) P.T.push_back(to_i64(T.gram()(i, j)));
    P.n = n;
    P.phi = cyclotomic(n);
    P.B = bound;
    if (P.phi.size() == 3) {
        // x^2 - c x + 1
        P.quadratic = true;
        P.c = -P.phi[1];
    }
}

// Runs the search; sinks[t] receives the leaves found by thread t.
template <class Sink>
void run_search(const LiftProblem& P, bool parallel, const Sink& proto, std::vector<Sink>& sinks) {
    std::vector<std::vector<int64_t>> first;
    {
        LiftSearcher s(P);
        s.rows_for(0, [&](const std::vector<int64_t>& x) { first.push_back(x); });
    }
    int threads = parallel ? omp_get_max_threads() : 1;
    sinks.assign(size_t(threads), proto);
    if (!parallel) {
        LiftSearcher s(P);
        for (auto& x : first) {
            s.set_row(0, x);
            s.descend(1, sinks[0]);
        }
    } else {
#pragma omp parallel num_threads(threads)
        {
            LiftSearcher s(P);
            Sink& sink = sinks[size_t(omp_get_thread_num())];
#pragma omp for schedule(dynamic, 1)
            for (size_t k = 0; k < first.size(); ++k) {
                s.set_row(0, first[k]);
                s.descend(1, sink);
            }
        }
    }
    if (P.cap && P.visited > P.cap)
        throw ResourceCap("Hodge lift search for n = " + std::to_string(P.n) + " visited more than " +
                          std::to_string(P.cap) + " candidates");
}

struct CollectSink {
    std::vector<std::vector<int64_t>> lifts;
    void operator()(const std::vector<int64_t>& A) { lifts.push_back(A); }
};

// Keeps the lexicographically smallest lift for each residue of A modulo the exponent.
struct ResidueSink {
    int64_t e = 1;
    std::map<std::vector<int64_t>, std::vector<int64_t>> best;
    uint64_t count = 0;
    void operator()(const std::vector<int64_t>& A) {
        ++count;
        std::vector<int64_t> key(A.size());
        for (size_t i = 0; i < A.size(); ++i) key[i] = ((A[i] % e) + e) % e;
        auto it = best.find(key);
        if (it == best.end())
            best.emplace(std::move(key), A);
        else if (A < it->second)
            it->second = A;
    }
};

ZMat to_matrix(const std::vector<int64_t>& a, int r) {
    ZMat M(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) M(i, j) = Int(static_cast<long>(a[size_t(i) * r + j]));
    return M;
}

std::set<uint32_t> element_orders(const FiniteOrthGroup& G) {
    std::set<uint32_t> out;
    for (uint32_t a = 0; a < G.order(); ++a) out.insert(G.element_order(a));
    return out;
}

}  // namespace

Transcendental::Transcendental(GramLattice T, const EnumerationOptions& opt) : T_(std::move(T)) {
    if (!T_.is_even()) throw InputError("transcendental lattice must be even");
    auto nat = natural_discriminant_form(T_);
    natural_ = nat.has_value();
    D_ = natural_ ? *nat : discriminant_form(T_);
    G_ = std::make_shared<const FiniteOrthGroup>(orthogonal_group(D_.q, opt));
    ZMat m = ZMat::identity(T_.rank());
    for (int i = 0; i < T_.rank(); ++i) m(i, i) = -1;
    minus_id_ = image(m);
}

uint32_t Transcendental::image(const ZMat& g) const {
    if (!is_automorphism(T_, g)) throw InputError("matrix is not an isometry of T");
    auto idx = G_->index_of(discriminant_action(D_, g));
    if (!idx) throw InternalError("image of an isometry is not in O(T^#)");
    return *idx;
}

long totient(long n) {
    long r = n;
    for (long p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        while (n % p == 0) n /= p;
        r -= r / p;
    }
    if (n > 1) r -= r / n;
    return r;
}

std::vector<ZMat> hodge_lifts(const GramLattice& T, long n, int entry_bound, bool parallel, uint64_t max_candidates) {
    int r = T.rank();
    if (n == 2) {
        ZMat m = ZMat::identity(r);
        for (int i = 0; i < r; ++i) m(i, i) = -1;
        return {m};
    }
    LiftProblem P;
    make_problem(P, T, n, entry_bound);
    P.cap = max_candidates;
    if (r % (int(P.phi.size()) - 1) != 0) return {};
    std::vector<CollectSink> sinks;
    run_search(P, parallel, CollectSink{}, sinks);
    std::vector<std::vector<int64_t>> all;
    for (auto& s : sinks) all.insert(all.end(), s.lifts.begin(), s.lifts.end());
    std::sort(all.begin(), all.end());
    std::vector<ZMat> out;
    for (auto& a : all) out.push_back(to_matrix(a, r));
    return out;
}

HodgeSearch hodge_candidates(const Transcendental& TT, const HodgeSearchOptions& opt) {
    const GramLattice& T = TT.lattice();
    const FiniteOrthGroup& G = TT.group();
    int r = T.rank();
    HodgeSearch out;
    out.entry_bound = opt.entry_bound;
    out.kernel_size = opt.kernel_size;
    auto orders = element_orders(G);
    int64_t e = 1;
    for (auto d : TT.disc().q.d) e = std::lcm(e, d);

    auto admissible = [&](long n, uint32_t m) { return n % m == 0 && n / long(m) <= opt.kernel_size; };
    auto add_candidate = [&](long n, uint32_t x, const ZMat& lift) {
        uint32_t m = G.element_order(x);
        if (!admissible(n, m)) return;
        Subgroup H = subgroup_generated(G, std::vector<uint32_t>{x});
        for (auto& c : out.candidates)
            if (c.order == m && is_conjugate_subgroup(G, c.subgroup, H)) return;
        out.candidates.push_back({m, n, x, H, lift});
    };

    for (long n = 2; n <= 2L * r * r + 2; n += 2) {
        long ph = totient(n);
        if (r % ph != 0) continue;
        HodgeLiftOrder rec;
        rec.n = n;
        bool any = false;
        for (auto m : orders)
            if (admissible(n, m)) any = true;
        if (!any) {
            rec.status = HodgeLiftOrder::Status::no_image_order;
            out.orders.push_back(rec);
            continue;
        }
        if (n == 2) {
            rec.lifts = 1;
            out.orders.push_back(rec);
            ZMat m = ZMat::identity(r);
            for (int i = 0; i < r; ++i) m(i, i) = -1;
            add_candidate(2, TT.minus_identity(), m);
            continue;
        }
        if (r > opt.max_rank || (ph > 2 && r > opt.max_generic_rank)) {
            rec.status = HodgeLiftOrder::Status::rank_limit;
            out.orders.push_back(rec);
            continue;
        }
        LiftProblem P;
        make_problem(P, T, n, opt.entry_bound);
        P.cap = opt.max_candidates;
        ResidueSink proto;
        proto.e = e;
        std::vector<ResidueSink> sinks;
        run_search(P, opt.parallel, proto, sinks);
        ResidueSink merged;
        for (auto& s : sinks) {
            merged.count += s.count;
            for (auto& [k, a] : s.best) {
                auto it = merged.best.find(k);
                if (it == merged.best.end())
                    merged.best.emplace(k, a);
                else if (a < it->second)
                    it->second = a;
            }
        }
        rec.lifts = merged.count;
        out.orders.push_back(rec);
        // smallest lifts first, so that reported generators do not depend on the thread count
        std::vector<std::vector<int64_t>> reps;
        for (auto& kv : merged.best) reps.push_back(kv.second);
        std::sort(reps.begin(), reps.end());
        for (auto& a : reps) {
            ZMat A = to_matrix(a, r);
            add_candidate(n, TT.image(A), A);
        }
    }
    std::stable_sort(out.candidates.begin(), out.candidates.end(),
                     [](const HodgeCandidate& a, const HodgeCandidate& b) { return a.order < b.order; });
    return out;
}

std::vector<HodgeChoice> resolve_hodge(const Transcendental& T, const HodgeSpec& spec) {
    const FiniteOrthGroup& G = T.group();
    std::vector<HodgeChoice> out;
    if (spec.mode == HodgeSpec::Mode::generator) {
        auto x = G.index_of(spec.generator);
        if (!x) throw InputError("Hodge generator is not an element of O(T^#)");
        HodgeCandidate c;
        c.generator = *x;
        c.order = G.element_order(*x);
        c.subgroup = subgroup_generated(G, std::vector<uint32_t>{*x});
        c.lift_order = 0;
        if (!c.subgroup.contains(T.minus_identity()))
            throw InputError("Hodge subgroup must contain the image of -id");
        out.push_back({"|H| = " + std::to_string(c.order), c});
        return out;
    }
    HodgeSearch s = hodge_candidates(T, spec.search);
    std::map<uint32_t, int> per_order;
    for (auto& c : s.candidates) per_order[c.order]++;
    std::map<uint32_t, int> seen;
    for (auto& c : s.candidates) {
        if (spec.mode == HodgeSpec::Mode::order && c.order != spec.order) continue;
        std::string label = "|H| = " + std::to_string(c.order);
        if (per_order[c.order] > 1) label += " (class " + std::to_string(++seen[c.order]) + ")";
        out.push_back({label, c});
    }
    if (out.empty())
        throw InputError("no Hodge isometry with image of order " + std::to_string(spec.order) +
                         " found within entry bound " + std::to_string(spec.search.entry_bound));
    return out;
}

namespace {

FrameImage transported_image(const Transcendental& T, const GenusClass& W, const uint32_t* post) {
    const FiniteOrthGroup& G = T.group();
    DiscriminantForm DW = discriminant_form(W.lattice);
    auto phi = are_isometric(DW.q, T.disc().q.negated());
    if (!phi) throw InputError("frame is not in the frame genus of T");
    AbelianGroup AW(DW.q.d), AT(T.disc().q.d);
    int kw = DW.q.rank(), kt = T.disc().q.rank();
    auto apply = [&](const AbelianGroup& from, const AbelianGroup& to, const FiniteIsometry& M, uint32_t x) {
        auto c = from.coords(x);
        std::vector<int64_t> y(size_t(to.rank()), 0);
        for (int i = 0; i < from.rank(); ++i)
            for (int j = 0; j < to.rank(); ++j) y[j] += c[i] * M.at(i, j);
        return to.index(y);
    };
    // phi is a (kw x kt) map; FiniteIsometry stores it row by row
    FiniteIsometry F = *phi;
    std::vector<uint32_t> fwd(AW.size()), back(AT.size());
    for (uint32_t x = 0; x < AW.size(); ++x) {
        auto c = AW.coords(x);
        std::vector<int64_t> y(kt, 0);
        for (int i = 0; i < kw; ++i)
            for (int j = 0; j < kt; ++j) y[j] += c[i] * F.m[size_t(i) * kt + j];
        uint32_t t = AT.index(y);
        if (post) t = G.perm(*post)[t];
        fwd[x] = t;
        back[t] = x;
    }
    FrameImage out;
    out.transport.k = kw;
    for (uint32_t x = 0; x < uint32_t(kw); ++x) {
        auto c = AT.coords(fwd[AW.generator(int(x))]);
        out.transport.m.insert(out.transport.m.end(), c.begin(), c.end());
    }
    std::vector<uint32_t> gens;
    for (auto& g : W.aut.generators) {
        FiniteIsometry k = discriminant_action(DW, g);
        FiniteIsometry img;
        img.k = kt;
        for (int j = 0; j < kt; ++j) {
            uint32_t y = fwd[apply(AW, AW, k, back[AT.generator(j)])];
            auto c = AT.coords(y);
            img.m.insert(img.m.end(), c.begin(), c.end());
        }
        auto idx = G.index_of(img);
        if (!idx) throw InternalError("transported isometry is not in O(T^#)");
        if (std::find(gens.begin(), gens.end(), *idx) == gens.end()) gens.push_back(*idx);
    }
    std::sort(gens.begin(), gens.end());
    out.K = subgroup_generated(G, gens);
    return out;
}

}  // namespace

FrameImage frame_image(const Transcendental& T, const GenusClass& W) { return transported_image(T, W, nullptr); }

FrameImage frame_image(const Transcendental& T, const GenusClass& W, uint32_t g) {
    return transported_image(T, W, &g);
}

uint64_t multiplicity(const Transcendental& T, const Subgroup& H, const Subgroup& K) {
    const FiniteOrthGroup& G = T.group();
    uint64_t m = double_coset_count(G, H, K);
    if (T.lattice().rank() % 2 == 1 && H.contains(T.minus_identity()) && H.order() <= 2) {
        if (m * K.order() != G.order())
            throw InternalError("odd rank shortcut |G|/|K| disagrees with the double coset count");
    }
    return m;
}

Bounds uniform_bounds(const Transcendental& T, size_t genus_size, const Subgroup& H) {
    Bounds b;
    b.lower = genus_size;
    b.upper = genus_size * (T.group().order() / H.order());
    return b;
}

CountResult count_fibrations(const Transcendental& T, const GenusList& genus, const std::vector<HodgeChoice>& hodge) {
    CountResult res;
    res.hodge = hodge;
    size_t nf = genus.classes.size();
    res.frames.resize(nf);
    std::vector<std::exception_ptr> errors(nf);
#pragma omp parallel for schedule(dynamic, 1)
    for (size_t i = 0; i < nf; ++i) {
        try {
            const GenusClass& W = genus.classes[i];
            FrameReport& f = res.frames[i];
            f.id = "W" + std::to_string(i + 1);
            f.roots = W.roots.symbol();
            f.mw = W.mw;
            f.root_count = W.roots.root_count;
            f.aut_order = W.aut.order;
            FrameImage img = frame_image(T, W);
            f.disc_image_order = img.K.order();
            for (auto& h : hodge) {
                uint64_t m = multiplicity(T, h.candidate.subgroup, img.K);
                if (m < 1 || m > T.group().order() / h.candidate.subgroup.order())
                    throw InternalError("multiplicity outside [1, |H\\G|]");
                f.multiplicities.push_back(m);
            }
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (size_t h = 0; h < hodge.size(); ++h) {
        uint64_t total = 0;
        for (auto& f : res.frames) total += f.multiplicities[h];
        res.totals.push_back(total);
        res.bounds.push_back(uniform_bounds(T, nf, hodge[h].candidate.subgroup));
    }
    return res;
}

CountResult count_fibrations(const Transcendental& T, const GramLattice& seed, const HodgeSpec& spec,
                             const WalkOptions& walk) {
    GenusDescriptor d = frame_genus_descriptor(T.lattice());
    if (!in_genus(seed, d)) throw InputError("seed not in frame genus");
    auto hodge = resolve_hodge(T, spec);
    GenusList g = enumerate_genus(seed, walk);
    return count_fibrations(T, g, hodge);
}

}  // namespace k3f
