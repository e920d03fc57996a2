#include "k3f/lattice.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>
#include <regex>
#include <sstream>

namespace k3f {

// ---------------------------------------------------------------- finite forms

uint64_t FiniteQuadraticForm::order() const {
    uint64_t n = 1;
    for (auto x : d) n *= uint64_t(x);
    return n;
}

int64_t FiniteQuadraticForm::q_num(const std::vector<int64_t>& x) const {
    const int64_t m = 2 * e;
    __int128 s = 0;
    for (int i = 0; i < rank(); ++i) {
        if (!x[i]) continue;
        s += __int128(x[i]) * x[i] % m * Q[i];
        for (int j = i + 1; j < rank(); ++j)
            if (x[j]) s += __int128(2) * x[i] * x[j] % m * B[i][j];
        s %= m;
    }
    int64_t r = int64_t(s % m);
    return r < 0 ? r + m : r;
}

int64_t FiniteQuadraticForm::b_num(const std::vector<int64_t>& x, const std::vector<int64_t>& y) const {
    __int128 s = 0;
    for (int i = 0; i < rank(); ++i) {
        if (!x[i]) continue;
        for (int j = 0; j < rank(); ++j)
            if (y[j]) s = (s + __int128(x[i]) * y[j] % e * B[i][j]) % e;
    }
    int64_t r = int64_t(s % e);
    return r < 0 ? r + e : r;
}

FiniteQuadraticForm FiniteQuadraticForm::negated() const {
    FiniteQuadraticForm f = *this;
    for (auto& v : f.Q) v = mod_floor(-v, 2 * e);
    for (auto& r : f.B)
        for (auto& v : r) v = mod_floor(-v, e);
    return f;
}

FiniteQuadraticForm FiniteQuadraticForm::from_values(const std::vector<int64_t>& d, const std::vector<Rat>& q,
                                                     const std::vector<std::vector<Rat>>& b) {
    FiniteQuadraticForm f;
    f.d = d;
    f.e = 1;
    for (auto x : d) {
        if (x < 2) throw InputError("invariant factors must exceed 1");
        f.e = std::lcm(f.e, x);
    }
    int k = int(d.size());
    f.Q.assign(k, 0);
    f.B.assign(k, std::vector<int64_t>(k, 0));
    for (int i = 0; i < k; ++i) {
        Rat v = q[i] * f.e;
        if (v.get_den() != 1) throw InputError("q-value denominator does not divide the exponent");
        f.Q[i] = mod_floor(v.get_num().get_si() % (2 * f.e), 2 * f.e);
        for (int j = 0; j < k; ++j) {
            Rat w = b[i][j] * f.e;
            if (w.get_den() != 1) throw InputError("b-value denominator does not divide the exponent");
            f.B[i][j] = mod_floor(w.get_num().get_si() % f.e, f.e);
        }
    }
    for (int i = 0; i < k; ++i) {
        if (mod_floor(f.Q[i], f.e) != f.B[i][i]) throw InputError("q and b disagree on a generator");
        if (mod_floor(f.Q[i] * d[i] % (2 * f.e) * d[i], 2 * f.e) != 0 || (f.Q[i] * d[i]) % f.e != 0)
            throw InputError("q-value incompatible with generator order");
        for (int j = 0; j < k; ++j) {
            if (f.B[i][j] != f.B[j][i]) throw InputError("b is not symmetric");
            if ((f.B[i][j] * d[i]) % f.e != 0) throw InputError("b-value incompatible with generator order");
        }
    }
    return f;
}

FiniteQuadraticForm FiniteQuadraticForm::direct_sum(const FiniteQuadraticForm& a, const FiniteQuadraticForm& b) {
    std::vector<int64_t> d = a.d;
    d.insert(d.end(), b.d.begin(), b.d.end());
    int k = int(d.size());
    std::vector<Rat> q(k);
    std::vector<std::vector<Rat>> bb(k, std::vector<Rat>(k, Rat(0)));
    for (int i = 0; i < a.rank(); ++i) {
        q[i] = Rat(a.Q[i], a.e);
        for (int j = 0; j < a.rank(); ++j) bb[i][j] = Rat(a.B[i][j], a.e);
    }
    for (int i = 0; i < b.rank(); ++i) {
        q[a.rank() + i] = Rat(b.Q[i], b.e);
        for (int j = 0; j < b.rank(); ++j) bb[a.rank() + i][a.rank() + j] = Rat(b.B[i][j], b.e);
    }
    for (auto& v : q) v.canonicalize();
    for (auto& r : bb)
        for (auto& v : r) v.canonicalize();
    return from_values(d, q, bb);
}

std::string FiniteQuadraticForm::describe() const {
    if (trivial()) return "trivial form";
    std::ostringstream os;
    for (int i = 0; i < rank(); ++i) os << (i ? " + " : "") << "Z/" << d[i];
    os << "\nq on generators:";
    for (int i = 0; i < rank(); ++i) {
        Rat v(Q[i], e);
        v.canonicalize();
        os << " " << v;
    }
    os << "  (mod 2)\nb on generators:\n";
    for (int i = 0; i < rank(); ++i) {
        os << " ";
        for (int j = 0; j < rank(); ++j) {
            Rat v(B[i][j], e);
            v.canonicalize();
            os << " " << v;
        }
        os << "\n";
    }
    os << "  (mod 1)";
    return os.str();
}

// ---------------------------------------------------------------- lattices

GramLattice::GramLattice(ZMat gram, std::string label) : gram_(std::move(gram)), label_(std::move(label)) {
    if (!is_symmetric(gram_)) throw InputError("Gram matrix is not symmetric");
    if (rank() > 0 && determinant(gram_) == 0) throw InputError("degenerate lattice");
}

Int GramLattice::det() const { return determinant(gram_); }

bool GramLattice::is_even() const {
    for (int i = 0; i < rank(); ++i)
        if (gram_(i, i) % 2 != 0) return false;
    return true;
}

Int GramLattice::norm(const ZVec& v) const {
    Int s = 0;
    for (int i = 0; i < rank(); ++i)
        for (int j = 0; j < rank(); ++j) s += v[i] * gram_(i, j) * v[j];
    return s;
}

std::pair<int, int> signature(const GramLattice& L) {
    int n = L.rank();
    QMat a = to_rat(L.gram());
    int pos = 0, neg = 0;
    for (int k = 0; k < n; ++k) {
        int p = -1;
        for (int i = k; i < n; ++i)
            if (a(i, i) != 0) { p = i; break; }
        if (p < 0) {
            // all remaining diagonal entries vanish: x_r += x_c creates a nonzero one
            int r0 = -1, c0 = -1;
            for (int r = k; r < n && r0 < 0; ++r)
                for (int c = r + 1; c < n; ++c)
                    if (a(r, c) != 0) { r0 = r; c0 = c; break; }
            if (r0 < 0) throw InputError("degenerate lattice");
            for (int c = 0; c < n; ++c) a(r0, c) += a(c0, c);
            for (int r = 0; r < n; ++r) a(r, r0) += a(r, c0);
            p = r0;
        }
        a.swap_rows(k, p);
        a.swap_cols(k, p);
        const Rat piv = a(k, k);
        (piv > 0 ? pos : neg)++;
        for (int i = k + 1; i < n; ++i) {
            if (a(i, k) == 0) continue;
            Rat f = a(i, k) / piv;
            for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
        }
        for (int i = k + 1; i < n; ++i) a(k, i) = 0;
        for (int i = k + 1; i < n; ++i) a(i, k) = 0;
    }
    return {pos, neg};
}

// ---------------------------------------------------------------- discriminant

namespace {

std::vector<int64_t> snf_coords(const ZMat& gram, const ZMat& cols, const std::vector<int64_t>& d, const QVec& x) {
    QVec z = mul(x, gram);
    std::vector<int64_t> w(d.size(), 0);
    for (size_t j = 0; j < d.size(); ++j) {
        Rat s = 0;
        for (size_t i = 0; i < z.size(); ++i) s += z[i] * cols(int(i), int(j));
        if (s.get_den() != 1) throw InputError("vector is not in the dual lattice");
        Int r = s.get_num() % Int(static_cast<long>(d[j]));
        if (r < 0) r += d[j];
        w[j] = r.get_si();
    }
    return w;
}

uint64_t mixed_index(const std::vector<int64_t>& x, const std::vector<int64_t>& d) {
    uint64_t idx = 0;
    for (size_t i = 0; i < d.size(); ++i) idx = idx * uint64_t(d[i]) + uint64_t(x[i]);
    return idx;
}

void fill_form(DiscriminantForm& D, const std::vector<int64_t>& d) {
    int k = int(d.size());
    int64_t e = 1;
    for (auto x : d) e = std::lcm(e, x);
    std::vector<Rat> q(k);
    std::vector<std::vector<Rat>> b(k, std::vector<Rat>(k));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            Rat v = dot(D.lifts[i], D.gram, D.lifts[j]);
            if (i == j) {
                Rat m = v / 2;
                Int fl;
                mpz_fdiv_q(fl.get_mpz_t(), m.get_num_mpz_t(), m.get_den_mpz_t());
                q[i] = v - 2 * Rat(fl);
            }
            Int fl;
            mpz_fdiv_q(fl.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
            b[i][j] = v - Rat(fl);
        }
    D.q = FiniteQuadraticForm::from_values(d, q, b);
}

}  // namespace

std::vector<int64_t> DiscriminantForm::coords(const QVec& x) const {
    auto w = snf_coords(gram, snf_cols, snf_d, x);
    if (snf_to_gen.empty()) return w;
    std::vector<int64_t> c(q.rank(), 0);
    for (size_t i = 0; i < w.size(); ++i)
        for (int j = 0; j < q.rank(); ++j) c[j] = (c[j] + w[i] * snf_to_gen[i][j]) % q.d[j];
    return c;
}

DiscriminantForm discriminant_form(const GramLattice& L) {
    if (!L.is_even()) throw InputError("odd lattice: discriminant quadratic form is not defined mod 2Z");
    DiscriminantForm D;
    D.gram = L.gram();
    int n = L.rank();
    if (n == 0) return D;
    Smith s = smith_normal_form(L.gram());
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
        if (abs(s.D(i, i)) > 1) keep.push_back(i);
    D.snf_cols = ZMat(n, int(keep.size()));
    for (int i = 0; i < n; ++i)
        for (size_t j = 0; j < keep.size(); ++j) D.snf_cols(i, int(j)) = s.V(i, keep[j]);
    QMat Vinv = inverse(to_rat(s.V));
    QMat Ginv = inverse(to_rat(L.gram()));
    for (int idx : keep) {
        if (!s.D(idx, idx).fits_slong_p()) throw ResourceCap("invariant factor exceeds 64-bit range");
        D.snf_d.push_back(Int(abs(s.D(idx, idx))).get_si());
        QVec z = Vinv.row(idx);
        QVec x(n, Rat(0));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) x[b] += z[a] * Ginv(a, b);
        D.lifts.push_back(x);
    }
    fill_form(D, D.snf_d);
    return D;
}

DiscriminantForm discriminant_form(const GramLattice& L, const std::vector<QVec>& lifts) {
    DiscriminantForm base = discriminant_form(L);
    const auto& sd = base.snf_d;
    uint64_t total = base.q.order();
    if (total > (uint64_t(1) << 22)) throw ResourceCap("custom discriminant basis requires a small group");
    int k = int(lifts.size());
    std::vector<std::vector<int64_t>> s(k);
    std::vector<int64_t> ord(k);
    for (int j = 0; j < k; ++j) {
        s[j] = base.coords(lifts[j]);
        int64_t o = 1;
        for (size_t i = 0; i < sd.size(); ++i) o = std::lcm(o, sd[i] / gcd64(sd[i], s[j][i]));
        if (o < 2) throw InputError("generator lift represents the zero class");
        ord[j] = o;
    }
    uint64_t prod = 1;
    for (auto o : ord) prod *= uint64_t(o);
    if (prod != total) throw InputError("lifts do not form a basis of the discriminant group");
    // table from snf element to custom coordinates
    std::vector<std::vector<int64_t>> table(total);
    std::vector<int64_t> c(k, 0);
    for (uint64_t n = 0; n < total; ++n) {
        std::vector<int64_t> w(sd.size(), 0);
        for (int j = 0; j < k; ++j)
            for (size_t i = 0; i < sd.size(); ++i) w[i] = (w[i] + c[j] * s[j][i]) % sd[i];
        auto& slot = table[mixed_index(w, sd)];
        if (!slot.empty()) throw InputError("lifts do not form a basis of the discriminant group");
        slot = c;
        for (int j = k - 1; j >= 0; --j) {
            if (++c[j] < ord[j]) break;
            c[j] = 0;
        }
    }
    DiscriminantForm D = base;
    D.lifts = lifts;
    D.snf_to_gen.clear();
    for (size_t i = 0; i < sd.size(); ++i) {
        std::vector<int64_t> w(sd.size(), 0);
        w[i] = 1;
        D.snf_to_gen.push_back(table[mixed_index(w, sd)]);
    }
    fill_form(D, ord);
    return D;
}

std::optional<DiscriminantForm> natural_discriminant_form(const GramLattice& L) {
    int n = L.rank();
    std::vector<QVec> lifts;
    for (int i = 0; i < n; ++i) {
        Int g = 0;
        for (int j = 0; j < n; ++j) g = gcd(g, L.gram()(i, j));
        if (g <= 1) continue;
        QVec x(n, Rat(0));
        x[i] = Rat(1, g);
        x[i].canonicalize();
        lifts.push_back(x);
    }
    try {
        if (lifts.empty()) {
            if (abs(L.det()) != 1) return std::nullopt;
            return discriminant_form(L);
        }
        return discriminant_form(L, lifts);
    } catch (const InputError&) {
        return std::nullopt;
    }
}

// ---------------------------------------------------------------- constructors

GramLattice direct_sum(const GramLattice& a, const GramLattice& b) {
    int n = a.rank() + b.rank();
    ZMat g(n, n, Int(0));
    for (int i = 0; i < a.rank(); ++i)
        for (int j = 0; j < a.rank(); ++j) g(i, j) = a.gram()(i, j);
    for (int i = 0; i < b.rank(); ++i)
        for (int j = 0; j < b.rank(); ++j) g(a.rank() + i, a.rank() + j) = b.gram()(i, j);
    std::string label = a.label().empty() ? b.label() : (b.label().empty() ? a.label() : a.label() + " + " + b.label());
    return GramLattice(g, label);
}

GramLattice rescale(const GramLattice& L, const Int& n) {
    if (n == 0) throw InputError("rescale by zero");
    ZMat g = L.gram();
    for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j) g(i, j) *= n;
    return GramLattice(g, L.label().empty() ? "" : L.label() + "(" + n.get_str() + ")");
}

GramLattice ade_lattice(const std::string& sym) {
    if (sym == "U") return GramLattice(ZMat::from_rows({{0, 1}, {1, 0}}), "U");
    std::smatch m;
    static const std::regex bracket(R"(\[\s*(-?\d+)\s*\])");
    if (std::regex_match(sym, m, bracket)) {
        Int k(m[1].str());
        if (k == 0) throw InputError("invalid lattice symbol: " + sym);
        ZMat g(1, 1, k);
        return GramLattice(g, "[" + k.get_str() + "]");
    }
    static const std::regex ade(R"(([ADE])_?(\d+))");
    if (!std::regex_match(sym, m, ade)) throw InputError("invalid lattice symbol: " + sym);
    char t = m[1].str()[0];
    int n = std::stoi(m[2].str());
    if ((t == 'A' && n < 1) || (t == 'D' && n < 4) || (t == 'E' && (n < 6 || n > 8)))
        throw InputError("invalid lattice symbol: " + sym);
    ZMat g(n, n, Int(0));
    for (int i = 0; i < n; ++i) g(i, i) = -2;
    auto link = [&](int i, int j) { g(i, j) = g(j, i) = 1; };
    if (t == 'A') {
        for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
    } else if (t == 'D') {
        for (int i = 0; i + 2 < n; ++i) link(i, i + 1);
        link(n - 1, n - 3);
    } else {
        for (int i = 0; i + 2 < n; ++i) link(i, i + 1);
        link(n - 1, 2);
    }
    return GramLattice(g, std::string(1, t) + std::to_string(n));
}

GramLattice lattice_from_expression(const std::string& expr) {
    static const std::regex tok(R"((U|\[\s*-?\d+\s*\]|[ADE]_?\d+)(\(\s*(-?\d+)\s*\))?(\^(\d+))?)");
    GramLattice acc;
    std::string rest;
    for (char ch : expr)
        if (ch != '+') rest += ch;
    std::istringstream is(rest);
    std::string word;
    bool any = false;
    while (is >> word) {
        std::smatch m;
        if (!std::regex_match(word, m, tok)) throw InputError("invalid lattice expression: " + word);
        GramLattice part = ade_lattice(m[1].str());
        if (m[3].matched) part = rescale(part, Int(m[3].str()));
        int times = m[5].matched ? std::stoi(m[5].str()) : 1;
        for (int i = 0; i < times; ++i) acc = any ? direct_sum(acc, part) : part, any = true;
    }
    if (!any) throw InputError("empty lattice expression");
    return GramLattice(acc.gram(), expr);
}

GramLattice orthogonal_complement(const GramLattice& L, const ZMat& S) {
    ZMat GS = L.gram() * S.transpose();
    if (S.rows() > 0) {
        ZMat sg = S * GS;
        if (determinant(sg) == 0) throw InputError("sublattice is degenerate");
    }
    ZMat K = left_kernel(GS);
    return GramLattice(K * L.gram() * K.transpose());
}

// ---------------------------------------------------------------- file format

GramLattice read_lattice(std::istream& in, const std::string& source) {
    std::string line;
    int lineno = 0;
    int rank = -1;
    std::vector<std::vector<Int>> rows;
    auto fail = [&](const std::string& msg) {
        throw InputError(source + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;
        std::istringstream ls(line);
        std::string tokstr;
        std::vector<Int> vals;
        while (ls >> tokstr) {
            if (tokstr[0] == '#') break;
            Int v;
            if (v.set_str(tokstr, 10) != 0) fail("not an integer: " + tokstr);
            vals.push_back(v);
        }
        if (rank < 0) {
            if (vals.size() != 1 || vals[0] < 0 || !vals[0].fits_sint_p()) fail("expected the rank");
            rank = vals[0].get_si();
            continue;
        }
        if (int(rows.size()) >= rank) fail("too many rows");
        if (int(vals.size()) != rank) fail("expected " + std::to_string(rank) + " entries");
        rows.push_back(vals);
    }
    if (rank < 0) throw InputError(source + ": empty lattice file");
    if (int(rows.size()) != rank) throw InputError(source + ": expected " + std::to_string(rank) + " rows");
    ZMat g(rank, rank);
    for (int i = 0; i < rank; ++i)
        for (int j = 0; j < rank; ++j) g(i, j) = rows[i][j];
    return GramLattice(g, source);
}

GramLattice read_lattice_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open " + path);
    return read_lattice(f, path);
}

void write_lattice(std::ostream& out, const GramLattice& L) {
    out << L.rank() << "\n" << to_string(L.gram());
}

}  // namespace k3f
