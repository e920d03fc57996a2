#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "k3f/definite.hpp"

namespace k3f {

namespace {

Int inner(const ZVec& a, const ZMat& G, const ZVec& b) {
    Int s = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j)
            if (b[j] != 0) s += a[i] * G(int(i), int(j)) * b[j];
    }
    return s;
}

// Type of a connected simply laced Dynkin graph from its adjacency lists.
std::pair<char, int> dynkin_type(const std::vector<std::vector<int>>& adj, const std::vector<int>& nodes) {
    int r = int(nodes.size());
    int edges = 0, branch = -1;
    for (int v : nodes) {
        edges += int(adj[v].size());
        if (adj[v].size() > 3) throw InternalError("root component is not of ADE type");
        if (adj[v].size() == 3) {
            if (branch >= 0) throw InternalError("root component is not of ADE type");
            branch = v;
        }
    }
    if (edges / 2 != r - 1) throw InternalError("root component is not a tree");
    if (branch < 0) return {'A', r};
    std::vector<int> arms;
    for (int start : adj[branch]) {
        int len = 1, prev = branch, cur = start;
        while (true) {
            int next = -1;
            for (int w : adj[cur])
                if (w != prev) next = w;
            if (next < 0) break;
            if (adj[cur].size() > 2) throw InternalError("root component is not of ADE type");
            prev = cur;
            cur = next;
            ++len;
        }
        arms.push_back(len);
    }
    std::sort(arms.begin(), arms.end());
    if (arms[0] == 1 && arms[1] == 1) return {'D', r};
    if (arms[0] == 1 && arms[1] == 2 && arms[2] >= 2 && arms[2] <= 4) return {'E', r};
    throw InternalError("root component is not of ADE type");
}

}  // namespace

std::string RootDatum::symbol() const {
    if (components.empty()) return "0";
    std::ostringstream out;
    size_t i = 0;
    bool first = true;
    while (i < components.size()) {
        size_t j = i;
        while (j < components.size() && components[j].type == components[i].type &&
               components[j].rank == components[i].rank)
            ++j;
        if (!first) out << ' ';
        first = false;
        out << components[i].type << components[i].rank;
        if (j - i > 1) out << '^' << (j - i);
        i = j;
    }
    return out.str();
}

RootDatum root_classification(const GramLattice& W) {
    ZMat G = positive_gram(W);
    int n = G.rows();
    RootDatum R;
    R.simple_roots = ZMat(0, n);
    if (n == 0) return R;
    std::vector<std::vector<int64_t>> roots;
    for (auto& v : short_vectors_positive(G, 2)) {
        if (inner(v, G, v) != 2) throw InputError("lattice is not even");
        std::vector<int64_t> w(n);
        for (int i = 0; i < n; ++i) w[i] = v[i].get_si();
        roots.push_back(w);
    }
    R.root_count = 2 * roots.size();
    if (roots.empty()) return R;

    // generic functional f(x) = sum x_i k^i with the smallest k >= 2 nonzero on every root
    std::vector<__int128> f(n);
    auto eval = [&](const std::vector<int64_t>& v) {
        __int128 s = 0;
        for (int i = 0; i < n; ++i) s += f[i] * v[i];
        return s;
    };
    for (long k = 2;; ++k) {
        __int128 p = 1;
        for (int i = 0; i < n; ++i, p *= k) f[i] = p;
        bool ok = true;
        for (auto& v : roots)
            if (eval(v) == 0) {
                ok = false;
                break;
            }
        if (ok) break;
    }
    std::vector<std::pair<__int128, std::vector<int64_t>>> pos;
    for (auto& v : roots) {
        __int128 e = eval(v);
        if (e < 0) {
            for (auto& c : v) c = -c;
            e = -e;
        }
        pos.push_back({e, v});
    }
    std::sort(pos.begin(), pos.end());
    std::set<std::vector<int64_t>> index;
    for (auto& pr : pos) index.insert(pr.second);
    std::vector<ZVec> simple;
    std::vector<int64_t> d(n);
    for (size_t i = 0; i < pos.size(); ++i) {
        bool decomposable = false;
        for (size_t j = 0; j < i && !decomposable; ++j) {
            if (pos[j].first >= pos[i].first) break;
            for (int c = 0; c < n; ++c) d[c] = pos[i].second[c] - pos[j].second[c];
            if (index.count(d)) decomposable = true;
        }
        if (!decomposable) simple.push_back(ZVec(pos[i].second.begin(), pos[i].second.end()));
    }
    int r = int(simple.size());
    std::vector<std::vector<int>> adj(r);
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j) {
            Int ip = inner(simple[i], G, simple[j]);
            if (ip == -1) {
                adj[i].push_back(j);
                adj[j].push_back(i);
            } else if (ip != 0) {
                throw InternalError("simple roots with inner product " + ip.get_str());
            }
        }
    std::vector<int> comp(r, -1);
    std::vector<RootComponent> comps;
    for (int s = 0; s < r; ++s) {
        if (comp[s] >= 0) continue;
        RootComponent c;
        std::vector<int> stack = {s};
        comp[s] = int(comps.size());
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            c.nodes.push_back(v);
            for (int w : adj[v])
                if (comp[w] < 0) {
                    comp[w] = comp[s];
                    stack.push_back(w);
                }
        }
        std::sort(c.nodes.begin(), c.nodes.end());
        auto t = dynkin_type(adj, c.nodes);
        c.type = t.first;
        c.rank = t.second;
        comps.push_back(c);
    }
    std::stable_sort(comps.begin(), comps.end(), [](const RootComponent& a, const RootComponent& b) {
        if (a.type != b.type) return a.type < b.type;
        return a.rank < b.rank;
    });
    // renumber simple roots component by component
    ZMat S(r, n);
    int row = 0;
    for (auto& c : comps) {
        for (auto& v : c.nodes) {
            S.set_row(row, simple[v]);
            v = row++;
        }
    }
    // simple roots reported with the original sign convention are the same vectors
    R.simple_roots = S;
    R.components = comps;
    return R;
}

Int weyl_group_order(const RootDatum& R) {
    Int order = 1;
    for (auto& c : R.components) {
        Int f = 1;
        switch (c.type) {
            case 'A':
                for (int i = 2; i <= c.rank + 1; ++i) f *= i;
                break;
            case 'D':
                for (int i = 2; i <= c.rank; ++i) f *= i;
                f *= Int(1) << (c.rank - 1);
                break;
            default:
                f = c.rank == 6 ? Int(51840) : c.rank == 7 ? Int(2903040) : Int(696729600);
        }
        order *= f;
    }
    return order;
}

std::string MordellWeil::str() const {
    std::vector<std::string> parts;
    if (free_rank == 1) parts.push_back("Z");
    if (free_rank > 1) parts.push_back("Z^" + std::to_string(free_rank));
    size_t i = 0;
    while (i < torsion.size()) {
        size_t j = i;
        while (j < torsion.size() && torsion[j] == torsion[i]) ++j;
        std::string t = "Z/" + torsion[i].get_str();
        if (j - i > 1) t = "(" + t + ")^" + std::to_string(j - i);
        parts.push_back(t);
        i = j;
    }
    if (parts.empty()) return "0";
    std::string s = parts[0];
    for (size_t k = 1; k < parts.size(); ++k) s += " + " + parts[k];
    return s;
}

MordellWeil mordell_weil(const GramLattice& W, const RootDatum& R) {
    MordellWeil mw;
    int r = R.simple_roots.rows();
    mw.free_rank = W.rank() - r;
    if (r == 0) return mw;
    Smith s = smith_normal_form(R.simple_roots);
    for (int i = 0; i < r; ++i) {
        Int d = abs(s.D(i, i));
        if (d == 0) throw InternalError("simple roots are dependent");
        if (d > 1) mw.torsion.push_back(d);
    }
    std::sort(mw.torsion.begin(), mw.torsion.end());
    return mw;
}

ZMat reflection(const GramLattice& W, const ZVec& v) {
    int n = W.rank();
    const ZMat& G = W.gram();
    Int vv = W.norm(v);
    if (vv == 0) throw InputError("cannot reflect in an isotropic vector");
    ZVec Gv(n, Int(0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Gv[i] += G(i, j) * v[j];
    ZMat M = ZMat::identity(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Int num = 2 * Gv[i] * v[j];
            if (num % vv != 0) throw InputError("reflection is not integral");
            M(i, j) -= num / vv;
        }
    return M;
}

bool is_automorphism(const GramLattice& W, const ZMat& g) {
    if (g.rows() != W.rank() || g.cols() != W.rank()) return false;
    return g * W.gram() * g.transpose() == W.gram();
}

FiniteIsometry discriminant_action(const DiscriminantForm& D, const ZMat& g) {
    int k = D.q.rank();
    FiniteIsometry f;
    f.k = k;
    f.m.assign(size_t(k) * k, 0);
    QMat gq = to_rat(g);
    for (int i = 0; i < k; ++i) {
        const QVec& x = D.lifts[i];
        QVec y(x.size(), Rat(0));
        for (size_t a = 0; a < x.size(); ++a) {
            if (x[a] == 0) continue;
            for (size_t b = 0; b < x.size(); ++b) y[b] += x[a] * gq(int(a), int(b));
        }
        auto c = D.coords(y);
        for (int j = 0; j < k; ++j) f.at(i, j) = c[j];
    }
    return f;
}

FiniteOrthGroup discriminant_image(const DiscriminantForm& D, const std::vector<ZMat>& gens) {
    std::vector<FiniteIsometry> imgs;
    for (auto& g : gens) {
        FiniteIsometry f = discriminant_action(D, g);
        if (std::find(imgs.begin(), imgs.end(), f) == imgs.end()) imgs.push_back(f);
    }
    return FiniteOrthGroup(D.q, imgs);
}

}  // namespace k3f
