#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "k3f/definite.hpp"

namespace k3f {

namespace {

using V64 = std::vector<int64_t>;

struct V64Hash {
    size_t operator()(const V64& v) const {
        uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (auto x : v) {
            h ^= uint64_t(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return size_t(h);
    }
};

uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

int64_t small(const Int& v) {
    if (!v.fits_slong_p()) throw ResourceCap("vector entries exceed 64 bits");
    return v.get_si();
}

IMat small_mat(const ZMat& m) { return to_small(m); }

ZMat big_mat(const IMat& m) { return to_big(m); }

IMat imul(const IMat& a, const IMat& b) {
    IMat c(a.rows(), b.cols(), 0);
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            int64_t x = a(i, k);
            if (!x) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += x * b(k, j);
        }
    return c;
}

struct Reduced {
    ZMat T, Tinv, G;  // G = T * G0 * T^t
};

Reduced reduce(const ZMat& G0) {
    Reduced r;
    r.T = lll_transform(G0);
    r.G = r.T * G0 * r.T.transpose();
    r.Tinv = to_int(inverse(to_rat(r.T)));
    return r;
}

// Short vectors of a reduced lattice with both signs, plus invariants for pruning.
struct VectorSet {
    int n = 0;
    IMat G;
    std::vector<V64> vecs;
    std::vector<int64_t> norms;
    std::vector<V64> Gv;
    std::vector<uint64_t> fp;
    std::unordered_map<V64, int, V64Hash> index;

    int64_t dot_idx(int a, int b) const {
        int64_t s = 0;
        const V64& x = vecs[a];
        const V64& y = Gv[b];
        for (int i = 0; i < n; ++i) s += x[i] * y[i];
        return s;
    }
    int find(const V64& v) const {
        auto it = index.find(v);
        return it == index.end() ? -1 : it->second;
    }
};

VectorSet make_vector_set(const ZMat& Gred, const Int& bound) {
    VectorSet S;
    S.n = Gred.rows();
    S.G = small_mat(Gred);
    for (auto& v : short_vectors_positive(Gred, bound)) {
        V64 a(S.n), b(S.n);
        for (int i = 0; i < S.n; ++i) {
            a[i] = small(v[i]);
            b[i] = -a[i];
        }
        S.vecs.push_back(a);
        S.vecs.push_back(b);
    }
    size_t m = S.vecs.size();
    S.norms.resize(m);
    S.Gv.resize(m);
    for (size_t k = 0; k < m; ++k) {
        V64 g(S.n, 0);
        for (int i = 0; i < S.n; ++i)
            for (int j = 0; j < S.n; ++j) g[i] += S.G(i, j) * S.vecs[k][j];
        int64_t nm = 0;
        for (int i = 0; i < S.n; ++i) nm += S.vecs[k][i] * g[i];
        S.norms[k] = nm;
        S.Gv[k] = std::move(g);
        S.index[S.vecs[k]] = int(k);
    }
    // fingerprint: multiset of inner products with the vectors of minimal norm
    S.fp.assign(m, 0);
    if (m == 0) return S;
    int64_t mn = *std::min_element(S.norms.begin(), S.norms.end());
    std::vector<int> mins;
    for (size_t k = 0; k < m; ++k)
        if (S.norms[k] == mn) mins.push_back(int(k));
    if (double(m) * double(mins.size()) > 4e7) return S;
    std::vector<int64_t> ips(mins.size());
    for (size_t k = 0; k < m; ++k) {
        for (size_t t = 0; t < mins.size(); ++t) ips[t] = S.dot_idx(mins[t], int(k));
        std::sort(ips.begin(), ips.end());
        uint64_t h = mix(uint64_t(S.norms[k]));
        for (auto x : ips) h = mix(h ^ uint64_t(x));
        S.fp[k] = h;
    }
    return S;
}

// Backtracking over images of the basis vectors of a reduced source lattice among target vectors.
class Searcher {
public:
    Searcher(const IMat& Gs, const std::vector<uint64_t>& src_fp, const VectorSet& T, uint64_t cap)
        : Gs_(Gs), fp_(src_fp), T_(T), n_(Gs.rows()), cap_(cap), cand_(n_ + 1, std::vector<std::vector<int>>(n_)) {
        base_.resize(n_);
        for (int l = 0; l < n_; ++l)
            for (size_t k = 0; k < T.vecs.size(); ++k)
                if (T.norms[k] == Gs(l, l) && T.fp[k] == fp_[l]) base_[l].push_back(int(k));
    }

    // prefix: fixed images for levels 0..prefix.size()-1. Leaf callback returns true to stop.
    bool run(const std::vector<int>& prefix, const std::function<bool(const std::vector<int>&)>& leaf) {
        for (int l = 0; l < n_; ++l) {
            if (l < int(prefix.size())) {
                cand_[0][l].clear();
                if (std::find(base_[l].begin(), base_[l].end(), prefix[l]) != base_[l].end())
                    cand_[0][l].push_back(prefix[l]);
                else
                    return false;
            } else {
                cand_[0][l] = base_[l];
            }
            if (cand_[0][l].empty()) return false;
        }
        img_.assign(n_, -1);
        leaf_ = &leaf;
        return dfs(0);
    }

    uint64_t nodes() const { return nodes_; }
    const std::vector<int>& base(int l) const { return base_[l]; }

private:
    bool dfs(int k) {
        if (k == n_) return (*leaf_)(img_);
        for (int v : cand_[k][k]) {
            if (++nodes_ > cap_) throw ResourceCap("automorphism search exceeded the node cap; raise --max-candidates");
            img_[k] = v;
            bool ok = true;
            for (int l = k + 1; l < n_ && ok; ++l) {
                auto& out = cand_[k + 1][l];
                out.clear();
                int64_t want = Gs_(k, l);
                for (int u : cand_[k][l])
                    if (T_.dot_idx(u, v) == want) out.push_back(u);
                ok = !out.empty();
            }
            if (ok && dfs(k + 1)) return true;
        }
        return false;
    }

    const IMat& Gs_;
    const std::vector<uint64_t>& fp_;
    const VectorSet& T_;
    int n_;
    uint64_t cap_;
    uint64_t nodes_ = 0;
    std::vector<std::vector<std::vector<int>>> cand_;
    std::vector<std::vector<int>> base_;
    std::vector<int> img_;
    const std::function<bool(const std::vector<int>&)>* leaf_ = nullptr;
};

IMat images_to_matrix(const VectorSet& T, const std::vector<int>& img) {
    int n = T.n;
    IMat A(n, n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = T.vecs[img[i]][j];
    return A;
}

Int max_diag(const ZMat& G) {
    Int m = 0;
    for (int i = 0; i < G.rows(); ++i) m = std::max(m, G(i, i));
    return m;
}

std::vector<uint64_t> basis_fingerprints(const VectorSet& S) {
    std::vector<uint64_t> fp(S.n);
    for (int i = 0; i < S.n; ++i) {
        V64 e(S.n, 0);
        e[i] = 1;
        int idx = S.find(e);
        if (idx < 0) throw InternalError("basis vector missing from its short vector set");
        fp[i] = S.fp[idx];
    }
    return fp;
}

struct SearchResult {
    std::vector<IMat> gens;  // reduced coordinates
    Int order;
};

// Stabilizer chain: |G| is the product of the orbit lengths of e_{n-1}, ..., e_0 under the
// pointwise stabilizers of the earlier basis vectors.
SearchResult stabilizer_chain(const Reduced& R, const SearchOptions& opt) {
    int n = R.G.rows();
    SearchResult res;
    res.order = 1;
    if (n == 0) return res;
    VectorSet S = make_vector_set(R.G, max_diag(R.G));
    std::vector<uint64_t> fp = basis_fingerprints(S);
    IMat Gs = small_mat(R.G);
    Searcher search(Gs, fp, S, opt.cap);
    std::vector<int> e(n);
    for (int i = 0; i < n; ++i) {
        V64 v(n, 0);
        v[i] = 1;
        e[i] = S.find(v);
    }
    std::vector<std::vector<int>> perms;  // action of each generator on S
    auto perm_of = [&](const IMat& g) {
        std::vector<int> p(S.vecs.size());
        for (size_t k = 0; k < S.vecs.size(); ++k) {
            V64 w(n, 0);
            for (int i = 0; i < n; ++i) {
                int64_t c = S.vecs[k][i];
                if (!c) continue;
                for (int j = 0; j < n; ++j) w[j] += c * g(i, j);
            }
            int idx = S.find(w);
            if (idx < 0) throw InternalError("automorphism does not preserve short vectors");
            p[k] = idx;
        }
        return p;
    };
    auto orbit = [&](int start) {
        std::vector<char> seen(S.vecs.size(), 0);
        std::vector<int> orb = {start};
        seen[start] = 1;
        for (size_t t = 0; t < orb.size(); ++t)
            for (auto& p : perms) {
                int w = p[orb[t]];
                if (!seen[w]) {
                    seen[w] = 1;
                    orb.push_back(w);
                }
            }
        return std::make_pair(orb, seen);
    };
    for (int i = n - 1; i >= 0; --i) {
        std::vector<int> prefix(e.begin(), e.begin() + i);
        // candidate images of e_i with e_0..e_{i-1} fixed
        std::vector<int> cands;
        for (int v : search.base(i)) {
            bool ok = true;
            for (int j = 0; j < i && ok; ++j) ok = S.dot_idx(v, e[j]) == Gs(j, i);
            if (ok) cands.push_back(v);
        }
        auto [orb, in_orbit] = orbit(e[i]);
        std::vector<char> excluded(S.vecs.size(), 0);
        for (int v : cands) {
            if (in_orbit[v] || excluded[v]) continue;
            std::vector<int> pre = prefix;
            pre.push_back(v);
            std::vector<int> found;
            search.run(pre, [&](const std::vector<int>& img) {
                found = img;
                return true;
            });
            if (!found.empty()) {
                IMat g = images_to_matrix(S, found);
                res.gens.push_back(g);
                perms.push_back(perm_of(g));
                auto o = orbit(e[i]);
                orb = o.first;
                in_orbit = o.second;
            } else {
                auto o = orbit(v);
                for (int w : o.first) excluded[w] = 1;
            }
        }
        res.order *= Int(static_cast<unsigned long>(orb.size()));
    }
    return res;
}

ZMat to_original(const Reduced& A, const IMat& g, const Reduced& B) { return A.Tinv * big_mat(g) * B.T; }

// Full set of isometries between reduced lattices, in reduced coordinates.
std::vector<IMat> all_reduced_isometries(const Reduced& A, const Reduced& B, const SearchOptions& opt,
                                         bool first_only) {
    std::vector<IMat> out;
    int n = A.G.rows();
    if (n != B.G.rows()) return out;
    if (n == 0) {
        out.push_back(IMat(0, 0));
        return out;
    }
    Int bound = max_diag(A.G);
    VectorSet SA = make_vector_set(A.G, bound);
    VectorSet SB = make_vector_set(B.G, bound);
    if (SA.vecs.size() != SB.vecs.size()) return out;
    std::vector<uint64_t> fa = SA.fp, fb = SB.fp;
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    if (fa != fb) return out;
    IMat Gs = small_mat(A.G);
    Searcher search(Gs, basis_fingerprints(SA), SB, opt.cap);
    search.run({}, [&](const std::vector<int>& img) {
        out.push_back(images_to_matrix(SB, img));
        if (out.size() > 5000000) throw ResourceCap("too many isometries to list");
        return first_only;
    });
    return out;
}

}  // namespace

RootDecomposition root_decomposition(const GramLattice& W) {
    RootDecomposition c;
    c.lattice = W;
    c.G = positive_gram(W);
    c.n = W.rank();
    c.R = root_classification(W);
    ZMat Pi = c.R.simple_roots;
    c.r = Pi.rows();
    ZMat Cb = left_kernel(c.G * Pi.transpose());
    c.m = Cb.rows();
    if (c.r + c.m != c.n) throw InternalError("complement of the root lattice has wrong rank");
    c.Pi = small_mat(Pi);
    c.Cb = small_mat(Cb);
    c.GPi = small_mat(Pi * c.G * Pi.transpose());
    c.GC = Cb * c.G * Cb.transpose();
    c.B0 = ZMat(c.n, c.n);
    for (int i = 0; i < c.r; ++i) c.B0.set_row(i, Pi.row(i));
    for (int i = 0; i < c.m; ++i) c.B0.set_row(c.r + i, Cb.row(i));
    c.B0inv = inverse(to_rat(c.B0));
    Smith s = smith_normal_form(c.B0);
    // B0^{-1} = V D^{-1} U, so W / W0 is generated by (row i of U) / d_i
    for (int i = 0; i < c.n; ++i) {
        Int d = abs(s.D(i, i));
        if (d <= 1) continue;
        QVec y(c.n);
        for (int j = 0; j < c.n; ++j) y[j] = Rat(s.U(i, j), s.D(i, i));
        c.glue.push_back(y);
        c.N = lcm(c.N, d);
    }
    return c;
}

namespace {

// Node bijections between two connected Dynkin diagrams (given by node lists) preserving the Gram.
std::vector<std::vector<int>> component_isomorphisms(const IMat& GA, const std::vector<int>& na, const IMat& GB,
                                                     const std::vector<int>& nb) {
    std::vector<std::vector<int>> out;
    int k = int(na.size());
    if (int(nb.size()) != k) return out;
    // breadth-first order so that every node after the first has an earlier neighbour
    std::vector<int> order = {na[0]};
    std::vector<char> seen(GA.rows(), 0);
    seen[na[0]] = 1;
    for (size_t t = 0; t < order.size(); ++t)
        for (int v : na)
            if (!seen[v] && GA(order[t], v) != 0) {
                seen[v] = 1;
                order.push_back(v);
            }
    std::vector<int> img(k, -1);
    std::vector<char> used(GB.rows(), 0);
    std::function<void(int)> rec = [&](int i) {
        if (i == k) {
            std::vector<int> m(GA.rows(), -1);
            for (int t = 0; t < k; ++t) m[order[t]] = img[t];
            out.push_back(m);
            return;
        }
        for (int w : nb) {
            if (used[w]) continue;
            bool ok = true;
            for (int t = 0; t < i && ok; ++t) ok = GB(w, img[t]) == GA(order[i], order[t]);
            if (!ok) continue;
            img[i] = w;
            used[w] = 1;
            rec(i + 1);
            used[w] = 0;
        }
    };
    rec(0);
    return out;
}

// Bijections of simple roots A -> B preserving the Gram, assembled component by component. A partial
// map is kept only if each glue generator of A, restricted to the assigned nodes, agrees there with
// some element of the glue group of B (root coordinates, scaled by N).
void diagram_isomorphisms(const RootDecomposition& A, const RootDecomposition& B,
                          const std::vector<std::vector<int64_t>>& glueA,
                          const std::vector<std::vector<int64_t>>& groupB,
                          const std::function<bool(const std::vector<int>&)>& f) {
    const auto& CA = A.R.components;
    const auto& CB = B.R.components;
    int r = A.r;
    if (CA.size() != CB.size()) return;
    std::map<std::pair<int, int>, std::vector<std::vector<int>>> cache;
    auto isos = [&](int a, int b) -> const std::vector<std::vector<int>>& {
        auto key = std::make_pair(a, b);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        return cache[key] = component_isomorphisms(A.GPi, CA[a].nodes, B.GPi, CB[b].nodes);
    };
    std::vector<int> p(r, -1);
    std::vector<char> usedB(CB.size(), 0);
    // alive[g] = indices into groupB still compatible with generator g
    std::vector<std::vector<int>> alive0(glueA.size());
    for (auto& a : alive0) {
        a.resize(groupB.size());
        for (size_t i = 0; i < groupB.size(); ++i) a[i] = int(i);
    }
    bool stop = false;
    std::function<void(size_t, const std::vector<std::vector<int>>&)> rec = [&](size_t c,
                                                                               const std::vector<std::vector<int>>& alive) {
        if (stop) return;
        if (c == CA.size()) {
            stop = f(p);
            return;
        }
        for (size_t b = 0; b < CB.size() && !stop; ++b) {
            if (usedB[b] || CB[b].type != CA[c].type || CB[b].rank != CA[c].rank) continue;
            for (auto& m : isos(int(c), int(b))) {
                for (int v : CA[c].nodes) p[v] = m[v];
                std::vector<std::vector<int>> next(glueA.size());
                bool ok = true;
                for (size_t g = 0; g < glueA.size() && ok; ++g) {
                    for (int e : alive[g]) {
                        bool match = true;
                        for (int v : CA[c].nodes)
                            if (groupB[e][p[v]] != glueA[g][v]) {
                                match = false;
                                break;
                            }
                        if (match) next[g].push_back(e);
                    }
                    ok = !next[g].empty();
                }
                if (ok) {
                    usedB[b] = 1;
                    rec(c + 1, next);
                    usedB[b] = 0;
                }
                if (stop) break;
            }
        }
        for (int v : CA[c].nodes) p[v] = -1;
    };
    rec(0, alive0);
}

int64_t mod_n(const Int& a, const Int& N) {
    Int r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), N.get_mpz_t());
    return r.get_si();
}

// Isometries A -> B that map the simple roots of A onto those of B, in lattice coordinates.
// Every isometry is the composition of such a map with an element of the Weyl group of B.
std::vector<ZMat> chamber_maps(const RootDecomposition& A, const RootDecomposition& B, const SearchOptions& opt, bool first_only) {
    std::vector<ZMat> out;
    if (A.n != B.n || A.r != B.r || A.m != B.m || A.R.symbol() != B.R.symbol()) return out;
    if (A.N != B.N || A.glue.size() != B.glue.size()) return out;
    if (determinant(A.GC) != determinant(B.GC)) return out;
    int n = A.n, r = A.r, m = A.m;
    GramLattice CA(A.GC), CB(B.GC);
    std::vector<ZMat> H;
    if (m == 0) {
        H.push_back(ZMat(0, 0));
    } else {
        Reduced RA = reduce(A.GC), RB = reduce(B.GC);
        for (auto& h : all_reduced_isometries(RA, RB, opt, false)) H.push_back(to_original(RA, h, RB));
    }
    if (H.empty()) return out;
    const Int& N = A.N;
    if (!N.fits_slong_p()) throw ResourceCap("glue group too large");
    int64_t Nl = N.get_si();
    // scaled glue coordinates
    std::vector<std::vector<int64_t>> gR, gC;
    for (auto& y : A.glue) {
        std::vector<int64_t> a(r), c(m);
        for (int k = 0; k < r; ++k) a[k] = mod_n(Int(y[k] * N), N);
        for (int k = 0; k < m; ++k) c[k] = mod_n(Int(y[r + k] * N), N);
        gR.push_back(a);
        gC.push_back(c);
    }
    auto reduce_key = [&](V64& v) {
        for (auto& x : v) x = ((x % Nl) + Nl) % Nl;
    };
    std::unordered_map<V64, std::vector<int>, V64Hash> byKey;
    IMat CbB = B.Cb;
    for (size_t hi = 0; hi < H.size(); ++hi) {
        IMat h = small_mat(H[hi]);
        V64 key;
        for (size_t g = 0; g < gC.size(); ++g) {
            std::vector<int64_t> yh(m, 0);
            for (int k = 0; k < m; ++k)
                if (gC[g][k])
                    for (int l = 0; l < m; ++l) yh[l] = (yh[l] + gC[g][k] * h(k, l)) % Nl;
            V64 z(n, 0);
            for (int l = 0; l < m; ++l)
                if (yh[l])
                    for (int j = 0; j < n; ++j) z[j] = (z[j] + yh[l] * CbB(l, j)) % Nl;
            for (auto& x : z) x = -x;
            reduce_key(z);
            key.insert(key.end(), z.begin(), z.end());
        }
        byKey[key].push_back(int(hi));
    }
    bool done = false;
    uint64_t visited = 0;
    // elements of the glue group of B, scaled by N
    std::vector<V64> groupB = {V64(n, 0)};
    {
        std::vector<V64> gens;
        for (auto& y : B.glue) {
            V64 v(n);
            for (int k = 0; k < n; ++k) v[k] = mod_n(Int(y[k] * N), N);
            gens.push_back(v);
        }
        std::unordered_set<V64, V64Hash> seen = {groupB[0]};
        for (size_t t = 0; t < groupB.size(); ++t)
            for (auto& g : gens) {
                V64 w = groupB[t];
                for (int k = 0; k < n; ++k) w[k] = (w[k] + g[k]) % Nl;
                if (seen.insert(w).second) groupB.push_back(w);
                if (groupB.size() > 1000000) throw ResourceCap("glue group too large");
            }
    }
    diagram_isomorphisms(A, B, gR, groupB, [&](const std::vector<int>& p) {
        if (done) return true;
        if (++visited > opt.cap) throw ResourceCap("diagram automorphism enumeration exceeded the cap");
        V64 key;
        for (size_t g = 0; g < gR.size(); ++g) {
            V64 z(n, 0);
            for (int k = 0; k < r; ++k)
                if (gR[g][k])
                    for (int j = 0; j < n; ++j) z[j] = (z[j] + gR[g][k] * B.Pi(p[k], j)) % Nl;
            reduce_key(z);
            key.insert(key.end(), z.begin(), z.end());
        }
        auto it = byKey.find(key);
        if (it == byKey.end()) return false;
        for (int hi : it->second) {
            ZMat g0(n, n, Int(0));
            for (int k = 0; k < r; ++k) g0(k, p[k]) = 1;
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) g0(r + k, r + l) = H[hi](k, l);
            QMat gq = A.B0inv * to_rat(g0) * to_rat(B.B0);
            out.push_back(to_int(gq));
            if (first_only) {
                done = true;
                return true;
            }
        }
        return false;
    });
    return out;
}

// A small generating set of a finite matrix group given by all of its elements.
std::vector<ZMat> greedy_generators(const std::vector<ZMat>& elems) {
    std::vector<ZMat> gens;
    if (elems.empty()) return gens;
    int n = elems[0].rows();
    std::vector<IMat> small_elems;
    for (auto& e : elems) small_elems.push_back(small_mat(e));
    std::unordered_set<V64, V64Hash> closure;
    std::vector<IMat> cl = {IMat::identity(n)};
    closure.insert(cl[0].data());
    std::vector<IMat> sg;
    for (auto& e : small_elems) {
        if (closure.count(e.data())) continue;
        sg.push_back(e);
        gens.push_back(big_mat(e));
        // rebuild the closure
        closure.clear();
        cl.assign(1, IMat::identity(n));
        closure.insert(cl[0].data());
        for (size_t t = 0; t < cl.size(); ++t)
            for (auto& s : sg) {
                IMat x = imul(cl[t], s);
                if (closure.insert(x.data()).second) cl.push_back(x);
            }
        if (closure.size() == elems.size()) break;
    }
    return gens;
}

}  // namespace

AutomorphismGroup automorphism_group_search(const GramLattice& W, const SearchOptions& opt) {
    AutomorphismGroup A;
    Reduced R = reduce(positive_gram(W));
    SearchResult s = stabilizer_chain(R, opt);
    A.order = s.order;
    for (auto& g : s.gens) {
        ZMat go = to_original(R, g, R);
        if (!is_automorphism(W, go)) throw InternalError("search produced a non-automorphism");
        A.generators.push_back(go);
    }
    return A;
}

AutomorphismGroup automorphism_group(const GramLattice& W, const SearchOptions& opt) {
    return automorphism_group(root_decomposition(W), opt);
}

AutomorphismGroup automorphism_group(const RootDecomposition& c, const SearchOptions& opt) {
    const GramLattice& W = c.lattice;
    if (c.r == 0) return automorphism_group_search(W, opt);
    AutomorphismGroup A;
    A.chamber_stabilizer = chamber_maps(c, c, opt, false);
    for (auto& g : A.chamber_stabilizer)
        if (!is_automorphism(W, g)) throw InternalError("chamber stabilizer element is not an automorphism");
    A.order = weyl_group_order(c.R) * Int(static_cast<unsigned long>(A.chamber_stabilizer.size()));
    for (int i = 0; i < c.r; ++i) A.generators.push_back(reflection(W, c.R.simple_roots.row(i)));
    for (auto& g : greedy_generators(A.chamber_stabilizer)) A.generators.push_back(g);
    return A;
}

std::vector<ZMat> all_isometries(const GramLattice& A, const GramLattice& B, const SearchOptions& opt) {
    std::vector<ZMat> out;
    if (A.rank() != B.rank() || A.det() != B.det() || signature(A) != signature(B)) return out;
    Reduced RA = reduce(positive_gram(A)), RB = reduce(positive_gram(B));
    for (auto& g : all_reduced_isometries(RA, RB, opt, false)) out.push_back(to_original(RA, g, RB));
    return out;
}

std::optional<ZMat> isometric_search(const GramLattice& A, const GramLattice& B, const SearchOptions& opt) {
    if (A.rank() != B.rank() || A.det() != B.det() || signature(A) != signature(B)) return std::nullopt;
    Reduced RA = reduce(positive_gram(A)), RB = reduce(positive_gram(B));
    auto v = all_reduced_isometries(RA, RB, opt, true);
    if (v.empty()) return std::nullopt;
    return to_original(RA, v[0], RB);
}

std::optional<ZMat> isometric(const GramLattice& A, const GramLattice& B, const SearchOptions& opt) {
    if (A.rank() != B.rank() || A.det() != B.det() || signature(A) != signature(B)) return std::nullopt;
    if (A.rank() == 0) return ZMat(0, 0);
    return isometric(root_decomposition(A), root_decomposition(B), opt);
}

std::optional<ZMat> isometric(const RootDecomposition& ca, const RootDecomposition& cb, const SearchOptions& opt) {
    const GramLattice &A = ca.lattice, &B = cb.lattice;
    if (A.rank() != B.rank() || A.det() != B.det()) return std::nullopt;
    if (A.rank() == 0) return ZMat(0, 0);
    if ((A.gram()(0, 0) > 0) != (B.gram()(0, 0) > 0)) return std::nullopt;
    if (ca.R.root_count != cb.R.root_count || ca.R.symbol() != cb.R.symbol()) return std::nullopt;
    if (ca.r == 0) return isometric_search(A, B, opt);
    auto v = chamber_maps(ca, cb, opt, true);
    if (v.empty()) return std::nullopt;
    return v[0];
}

}  // namespace k3f
