#include "k3f/finqform.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace k3f {

// ---------------------------------------------------------------- abelian group

AbelianGroup::AbelianGroup(std::vector<int64_t> d) : d_(std::move(d)) {
    uint64_t n = 1;
    for (auto x : d_) {
        n *= uint64_t(x);
        if (n > (uint64_t(1) << 31)) throw ResourceCap("discriminant group too large to enumerate");
    }
    size_ = uint32_t(n);
}

std::vector<int64_t> AbelianGroup::coords(uint32_t idx) const {
    std::vector<int64_t> x(d_.size());
    for (int i = rank() - 1; i >= 0; --i) {
        x[i] = idx % d_[i];
        idx /= uint32_t(d_[i]);
    }
    return x;
}

uint32_t AbelianGroup::index(const std::vector<int64_t>& x) const {
    uint64_t idx = 0;
    for (int i = 0; i < rank(); ++i) idx = idx * uint64_t(d_[i]) + uint64_t(mod_floor(x[i], d_[i]));
    return uint32_t(idx);
}

uint32_t AbelianGroup::generator(int i) const {
    std::vector<int64_t> x(d_.size(), 0);
    x[i] = 1;
    return index(x);
}

uint32_t AbelianGroup::add(uint32_t a, uint32_t b) const {
    auto x = coords(a), y = coords(b);
    for (int i = 0; i < rank(); ++i) x[i] += y[i];
    return index(x);
}

uint32_t AbelianGroup::scale(uint32_t a, int64_t n) const {
    auto x = coords(a);
    for (int i = 0; i < rank(); ++i) x[i] = x[i] * mod_floor(n, d_[i]) % d_[i];
    return index(x);
}

// ---------------------------------------------------------------- isometries

FiniteIsometry FiniteIsometry::identity(int k) {
    FiniteIsometry g;
    g.k = k;
    g.m.assign(size_t(k) * k, 0);
    for (int i = 0; i < k; ++i) g.at(i, i) = 1;
    return g;
}

FiniteIsometry FiniteIsometry::from_rows(const std::vector<std::vector<int64_t>>& rows) {
    FiniteIsometry g;
    g.k = int(rows.size());
    for (auto& r : rows) {
        if (int(r.size()) != g.k) throw InputError("isometry matrix must be square");
        g.m.insert(g.m.end(), r.begin(), r.end());
    }
    return g;
}

std::string FiniteIsometry::str() const {
    std::ostringstream os;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) os << (j ? " " : "") << at(i, j);
        os << "\n";
    }
    return os.str();
}

namespace {

// Images of all elements under the hom sending generator i to imgs[i].
Perm extend(const AbelianGroup& src, const AbelianGroup& dst, const std::vector<uint32_t>& imgs) {
    Perm p(src.size());
    std::vector<std::vector<int64_t>> ic;
    for (auto v : imgs) ic.push_back(dst.coords(v));
    std::vector<int64_t> c(src.rank(), 0);
    std::vector<int64_t> acc(dst.rank(), 0);
    for (uint32_t x = 0; x < src.size(); ++x) {
        p[x] = dst.index(acc);
        // increment mixed radix counter c and keep acc = sum c_i * ic_i
        for (int i = src.rank() - 1; i >= 0; --i) {
            ++c[i];
            for (int j = 0; j < dst.rank(); ++j) acc[j] = (acc[j] + ic[i][j]) % dst.invariants()[j];
            if (c[i] < src.invariants()[i]) break;
            for (int j = 0; j < dst.rank(); ++j)
                acc[j] = mod_floor(acc[j] - c[i] * ic[i][j], dst.invariants()[j]);
            c[i] = 0;
        }
    }
    return p;
}

bool is_bijection(const Perm& p) {
    std::vector<char> seen(p.size(), 0);
    for (auto v : p) {
        if (seen[v]) return false;
        seen[v] = 1;
    }
    return true;
}

// Backtracking over images of generators of q1 in q2 respecting q and b values.
void search_isometries(const FiniteQuadraticForm& q1, const FiniteQuadraticForm& q2, const EnumerationOptions& opt,
                       const std::function<bool(const std::vector<uint32_t>&, const Perm&)>& leaf) {
    AbelianGroup A1(q1.d), A2(q2.d);
    if (A1.size() != A2.size()) return;
    const int k = q1.rank();
    const uint32_t n = A2.size();
    // Rational comparison of values with different exponents: compare cross-multiplied numerators.
    const int64_t e1 = q1.e, e2 = q2.e;
    std::vector<std::vector<int64_t>> c2(n);
    std::vector<int64_t> qv2(n);
    for (uint32_t x = 0; x < n; ++x) {
        c2[x] = A2.coords(x);
        qv2[x] = q2.q_num(c2[x]);
    }
    std::vector<std::vector<uint32_t>> cand(k);
    for (int i = 0; i < k; ++i) {
        for (uint32_t x = 0; x < n; ++x) {
            bool killed = true;
            for (int j = 0; j < A2.rank(); ++j)
                if ((c2[x][j] * q1.d[i]) % q2.d[j] != 0) { killed = false; break; }
            if (!killed) continue;
            if (__int128(qv2[x]) * e1 % (2 * e1 * e2) != __int128(q1.Q[i]) * e2 % (2 * e1 * e2)) continue;
            cand[i].push_back(x);
        }
    }
    std::vector<uint32_t> img(k);
    uint64_t visited = 0;
    bool stop = false;
    std::function<void(int)> dfs = [&](int i) {
        if (stop) return;
        if (i == k) {
            Perm p = extend(A1, A2, img);
            if (is_bijection(p) && !leaf(img, p)) stop = true;
            return;
        }
        for (uint32_t x : cand[i]) {
            if (++visited > opt.cap) throw ResourceCap("finite orthogonal group enumeration exceeded the cap; raise --max-candidates");
            bool ok = true;
            for (int j = 0; j < i && ok; ++j)
                ok = __int128(q2.b_num(c2[x], c2[img[j]])) * e1 % (e1 * e2) == __int128(q1.B[i][j]) * e2 % (e1 * e2);
            if (!ok) continue;
            img[i] = x;
            dfs(i + 1);
            if (stop) return;
        }
    };
    dfs(0);
}

}  // namespace

bool is_isometry(const FiniteQuadraticForm& q, const FiniteIsometry& g) {
    if (g.k != q.rank()) return false;
    AbelianGroup A(q.d);
    std::vector<uint32_t> imgs;
    for (int i = 0; i < g.k; ++i) {
        std::vector<int64_t> r(g.k);
        for (int j = 0; j < g.k; ++j) r[j] = mod_floor(g.at(i, j), q.d[j]);
        // well defined: d_i * image = 0
        for (int j = 0; j < g.k; ++j)
            if ((r[j] * q.d[i]) % q.d[j] != 0) return false;
        if (q.q_num(r) != q.Q[i]) return false;
        imgs.push_back(A.index(r));
    }
    for (int i = 0; i < g.k; ++i)
        for (int j = 0; j < g.k; ++j)
            if (q.b_num(A.coords(imgs[i]), A.coords(imgs[j])) != q.B[i][j]) return false;
    return is_bijection(extend(A, A, imgs));
}

// ---------------------------------------------------------------- group

size_t FiniteOrthGroup::KeyHash::operator()(const std::vector<uint32_t>& v) const {
    size_t h = 1469598103934665603ull;
    for (auto x : v) h = (h ^ x) * 1099511628211ull;
    return h;
}

std::vector<uint32_t> FiniteOrthGroup::key(const Perm& p) const {
    std::vector<uint32_t> k(A_.rank());
    for (int i = 0; i < A_.rank(); ++i) k[i] = p[A_.generator(i)];
    return k;
}

Perm FiniteOrthGroup::to_perm(const FiniteIsometry& g) const {
    if (g.k != A_.rank()) throw InputError("isometry has wrong size");
    std::vector<uint32_t> imgs;
    for (int i = 0; i < g.k; ++i) {
        std::vector<int64_t> r(g.k);
        for (int j = 0; j < g.k; ++j) r[j] = g.at(i, j);
        imgs.push_back(A_.index(r));
    }
    return extend(A_, A_, imgs);
}

FiniteIsometry FiniteOrthGroup::element(uint32_t a) const {
    FiniteIsometry g;
    g.k = A_.rank();
    for (int i = 0; i < g.k; ++i) {
        auto c = A_.coords(elems_[a][A_.generator(i)]);
        g.m.insert(g.m.end(), c.begin(), c.end());
    }
    return g;
}

std::optional<uint32_t> FiniteOrthGroup::index_of_perm(const Perm& p) const {
    auto it = lookup_.find(key(p));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<uint32_t> FiniteOrthGroup::index_of(const FiniteIsometry& g) const {
    return index_of_perm(to_perm(g));
}

std::vector<FiniteIsometry> FiniteOrthGroup::generators() const {
    std::vector<FiniteIsometry> out;
    for (auto g : gens_) out.push_back(element(g));
    return out;
}

uint32_t FiniteOrthGroup::mul(uint32_t a, uint32_t b) const {
    if (!table_.empty()) return table_[size_t(a) * elems_.size() + b];
    Perm c(A_.size());
    for (uint32_t x = 0; x < A_.size(); ++x) c[x] = elems_[b][elems_[a][x]];
    return lookup_.at(key(c));
}

uint32_t FiniteOrthGroup::element_order(uint32_t a) const {
    uint32_t o = 1;
    for (uint32_t x = a; x != identity(); x = mul(x, a)) ++o;
    return o;
}

void FiniteOrthGroup::close(const std::vector<Perm>& gens) {
    Perm id(A_.size());
    std::iota(id.begin(), id.end(), 0u);
    elems_ = {id};
    lookup_.clear();
    lookup_[key(id)] = 0;
    std::vector<uint32_t> parent = {0}, via = {0};
    std::vector<std::vector<uint32_t>> rmul(gens.size());
    for (size_t cur = 0; cur < elems_.size(); ++cur) {
        for (size_t g = 0; g < gens.size(); ++g) {
            Perm c(A_.size());
            for (uint32_t x = 0; x < A_.size(); ++x) c[x] = gens[g][elems_[cur][x]];
            auto k = key(c);
            auto it = lookup_.find(k);
            uint32_t idx;
            if (it == lookup_.end()) {
                idx = uint32_t(elems_.size());
                lookup_.emplace(std::move(k), idx);
                elems_.push_back(std::move(c));
                parent.push_back(uint32_t(cur));
                via.push_back(uint32_t(g));
            } else {
                idx = it->second;
            }
            rmul[g].push_back(idx);
        }
    }
    const size_t N = elems_.size();
    gens_.clear();
    for (auto& g : gens) gens_.push_back(lookup_.at(key(g)));
    if (N <= 4096) {
        // table[a][j] = a * j, using j = parent(j) * gen(j)
        table_.assign(N * N, 0);
        for (size_t a = 0; a < N; ++a) {
            table_[a * N] = uint32_t(a);
            for (size_t j = 1; j < N; ++j) table_[a * N + j] = rmul[via[j]][table_[a * N + parent[j]]];
        }
    } else {
        table_.clear();
    }
    inv_.assign(N, 0);
    for (size_t a = 0; a < N; ++a) {
        Perm p(A_.size());
        for (uint32_t x = 0; x < A_.size(); ++x) p[elems_[a][x]] = x;
        inv_[a] = lookup_.at(key(p));
    }
}

FiniteOrthGroup::FiniteOrthGroup(FiniteQuadraticForm q, const std::vector<FiniteIsometry>& gens)
    : q_(std::move(q)), A_(q_.d) {
    std::vector<Perm> ps;
    for (auto& g : gens) {
        if (!is_isometry(q_, g)) throw InputError("generator is not an isometry of the form:\n" + g.str());
        ps.push_back(to_perm(g));
    }
    close(ps);
}

class FiniteOrthGroupBuilder {
public:
    static FiniteOrthGroup build(const FiniteQuadraticForm& q, const std::vector<Perm>& all) {
        FiniteOrthGroup G;
        G.q_ = q;
        G.A_ = AbelianGroup(q.d);
        // choose generators greedily until the closure is everything
        std::vector<Perm> gens;
        G.close(gens);
        for (const Perm& p : all) {
            if (G.index_of_perm(p)) continue;
            gens.push_back(p);
            G.close(gens);
        }
        if (G.order() != all.size()) throw InternalError("closure of O(q) generators has the wrong order");
        return G;
    }
};

FiniteOrthGroup orthogonal_group(const FiniteQuadraticForm& q, const EnumerationOptions& opt) {
    std::vector<Perm> all;
    search_isometries(q, q, opt, [&](const std::vector<uint32_t>&, const Perm& p) {
        all.push_back(p);
        return true;
    });
    return FiniteOrthGroupBuilder::build(q, all);
}

std::optional<FiniteIsometry> are_isometric(const FiniteQuadraticForm& q1, const FiniteQuadraticForm& q2,
                                            const EnumerationOptions& opt) {
    std::optional<FiniteIsometry> found;
    AbelianGroup A2(q2.d);
    search_isometries(q1, q2, opt, [&](const std::vector<uint32_t>& img, const Perm&) {
        FiniteIsometry g;
        g.k = q1.rank();
        for (auto v : img) {
            auto c = A2.coords(v);
            g.m.insert(g.m.end(), c.begin(), c.end());
        }
        found = g;
        return false;
    });
    return found;
}

// ---------------------------------------------------------------- classes and subgroups

ConjugacyClasses conjugacy_classes(const FiniteOrthGroup& G) {
    ConjugacyClasses cc;
    const uint32_t N = uint32_t(G.order());
    cc.class_of.assign(N, UINT32_MAX);
    for (uint32_t a = 0; a < N; ++a) {
        if (cc.class_of[a] != UINT32_MAX) continue;
        uint32_t id = uint32_t(cc.classes.size());
        std::vector<uint32_t> queue = {a};
        cc.class_of[a] = id;
        for (size_t i = 0; i < queue.size(); ++i)
            for (uint32_t g : G.generator_indices()) {
                uint32_t c = G.mul(G.mul(G.inv(g), queue[i]), g);
                if (cc.class_of[c] == UINT32_MAX) {
                    cc.class_of[c] = id;
                    queue.push_back(c);
                }
            }
        cc.classes.push_back({a, uint32_t(queue.size()), G.element_order(a)});
    }
    return cc;
}

bool Subgroup::contains(uint32_t g) const { return std::binary_search(elements.begin(), elements.end(), g); }

Subgroup subgroup_generated(const FiniteOrthGroup& G, const std::vector<uint32_t>& gens) {
    Subgroup H;
    H.gens = gens;
    std::vector<char> in(G.order(), 0);
    std::vector<uint32_t> queue = {G.identity()};
    in[G.identity()] = 1;
    for (size_t i = 0; i < queue.size(); ++i)
        for (uint32_t g : gens) {
            uint32_t c = G.mul(queue[i], g);
            if (!in[c]) {
                in[c] = 1;
                queue.push_back(c);
            }
        }
    std::sort(queue.begin(), queue.end());
    H.elements = std::move(queue);
    return H;
}

Subgroup subgroup_generated(const FiniteOrthGroup& G, const std::vector<FiniteIsometry>& gens) {
    std::vector<uint32_t> idx;
    for (auto& g : gens) {
        auto i = G.index_of(g);
        if (!i) throw InputError("generator not in the group:\n" + g.str());
        idx.push_back(*i);
    }
    return subgroup_generated(G, idx);
}

Subgroup conjugate_subgroup(const FiniteOrthGroup& G, const Subgroup& K, uint32_t g) {
    std::vector<uint32_t> gens;
    for (auto k : K.gens) gens.push_back(G.mul(G.mul(G.inv(g), k), g));
    return subgroup_generated(G, gens);
}

bool is_normal(const FiniteOrthGroup& G, const Subgroup& K) {
    for (uint32_t g : G.generator_indices())
        for (uint32_t k : K.gens)
            if (!K.contains(G.mul(G.mul(G.inv(g), k), g))) return false;
    return true;
}

std::optional<uint32_t> is_conjugate_subgroup(const FiniteOrthGroup& G, const Subgroup& K1, const Subgroup& K2) {
    if (K1.order() != K2.order()) return std::nullopt;
    for (uint32_t g = 0; g < G.order(); ++g) {
        bool ok = true;
        for (uint32_t k : K1.gens)
            if (!K2.contains(G.mul(G.mul(G.inv(g), k), g))) { ok = false; break; }
        if (ok) return g;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- double cosets

uint64_t double_cosets_partition(const FiniteOrthGroup& G, const Subgroup& H, const Subgroup& K,
                                 std::vector<uint64_t>* sizes) {
    const uint32_t N = uint32_t(G.order());
    std::vector<char> seen(N, 0);
    uint64_t count = 0;
    for (uint32_t a = 0; a < N; ++a) {
        if (seen[a]) continue;
        ++count;
        std::vector<uint32_t> queue = {a};
        seen[a] = 1;
        for (size_t i = 0; i < queue.size(); ++i) {
            uint32_t x = queue[i];
            for (uint32_t h : H.gens) {
                uint32_t y = G.mul(h, x);
                if (!seen[y]) seen[y] = 1, queue.push_back(y);
            }
            for (uint32_t k : K.gens) {
                uint32_t y = G.mul(x, k);
                if (!seen[y]) seen[y] = 1, queue.push_back(y);
            }
        }
        if (sizes) sizes->push_back(queue.size());
    }
    return count;
}

namespace {

uint64_t burnside_total(const FiniteOrthGroup& G, const Subgroup& H, const Subgroup& K, bool parallel) {
    const int64_t nh = int64_t(H.order()), nk = int64_t(K.order());
    const uint32_t N = uint32_t(G.order());
    uint64_t total = 0;
    if (parallel) {
#pragma omp parallel for schedule(dynamic) reduction(+ : total) collapse(2)
        for (int64_t i = 0; i < nh; ++i)
            for (int64_t j = 0; j < nk; ++j) {
                uint32_t h = H.elements[i], k = K.elements[j];
                uint64_t fix = 0;
                for (uint32_t g = 0; g < N; ++g)
                    if (G.mul(G.mul(h, g), k) == g) ++fix;
                total += fix;
            }
    } else {
        for (int64_t i = 0; i < nh; ++i)
            for (int64_t j = 0; j < nk; ++j) {
                uint32_t h = H.elements[i], k = K.elements[j];
                for (uint32_t g = 0; g < N; ++g)
                    if (G.mul(G.mul(h, g), k) == g) ++total;
            }
    }
    uint64_t denom = uint64_t(nh) * uint64_t(nk);
    if (total % denom != 0) throw InternalError("Cauchy-Frobenius sum is not divisible by |H||K|");
    return total / denom;
}

}  // namespace

uint64_t double_cosets_burnside_serial(const FiniteOrthGroup& G, const Subgroup& H, const Subgroup& K) {
    return burnside_total(G, H, K, false);
}

uint64_t double_cosets_burnside(const FiniteOrthGroup& G, const Subgroup& H, const Subgroup& K) {
    return burnside_total(G, H, K, true);
}

uint64_t double_coset_count(const FiniteOrthGroup& G, const Subgroup& H, const Subgroup& K) {
    std::vector<uint64_t> sizes;
    uint64_t a = double_cosets_partition(G, H, K, &sizes);
    uint64_t b = double_cosets_burnside(G, H, K);
    if (a != b)
        throw InternalError("double coset count mismatch: partition " + std::to_string(a) + ", Cauchy-Frobenius " +
                            std::to_string(b));
    uint64_t s = 0;
    for (auto x : sizes) s += x;
    if (s != G.order()) throw InternalError("double cosets do not partition the group");
    return a;
}

// ---------------------------------------------------------------- data files

std::vector<FiniteIsometry> parse_isometries(const std::string& text, int k, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<int64_t>> rows;
    std::vector<FiniteIsometry> out;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto pos = line.find('#');
        if (pos != std::string::npos) line = line.substr(0, pos);
        std::istringstream ls(line);
        std::vector<int64_t> r;
        std::string tok;
        while (ls >> tok) {
            try {
                size_t used = 0;
                r.push_back(std::stoll(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw InputError(source + ":" + std::to_string(lineno) + ": not an integer: " + tok);
            }
        }
        if (r.empty()) continue;
        if (int(r.size()) != k)
            throw InputError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(k) + " entries");
        rows.push_back(r);
        if (int(rows.size()) == k) {
            out.push_back(FiniteIsometry::from_rows(rows));
            rows.clear();
        }
    }
    if (!rows.empty()) throw InputError(source + ": incomplete matrix block");
    return out;
}

std::vector<FiniteIsometry> read_isometries(const std::string& path, int k) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_isometries(ss.str(), k, path);
}

}  // namespace k3f
