// Even integral lattices given by Gram matrices, and their discriminant forms.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "k3f/arith.hpp"

namespace k3f {

// Finite quadratic form on A = Z/d_0 + ... + Z/d_{k-1} given on generators.
// With e the exponent of A, q(g_i) = Q[i]/e mod 2 and b(g_i,g_j) = B[i][j]/e mod 1.
struct FiniteQuadraticForm {
    std::vector<int64_t> d;
    int64_t e = 1;
    std::vector<int64_t> Q;
    std::vector<std::vector<int64_t>> B;

    int rank() const { return int(d.size()); }
    uint64_t order() const;
    bool trivial() const { return d.empty(); }

    // Values on an element given by generator coordinates.
    int64_t q_num(const std::vector<int64_t>& x) const;  // numerator over e, mod 2e
    int64_t b_num(const std::vector<int64_t>& x, const std::vector<int64_t>& y) const;  // mod e
    Rat q_value(const std::vector<int64_t>& x) const {
        Rat r(q_num(x), e);
        r.canonicalize();
        return r;
    }
    Rat b_value(const std::vector<int64_t>& x, const std::vector<int64_t>& y) const {
        Rat r(b_num(x, y), e);
        r.canonicalize();
        return r;
    }

    FiniteQuadraticForm negated() const;
    static FiniteQuadraticForm direct_sum(const FiniteQuadraticForm& a, const FiniteQuadraticForm& b);
    // Build from rational values; validates consistency.
    static FiniteQuadraticForm from_values(const std::vector<int64_t>& d, const std::vector<Rat>& q,
                                           const std::vector<std::vector<Rat>>& b);
    std::string describe() const;
};

class GramLattice {
public:
    GramLattice() = default;
    explicit GramLattice(ZMat gram, std::string label = {});

    int rank() const { return gram_.rows(); }
    const ZMat& gram() const { return gram_; }
    const std::string& label() const { return label_; }
    Int det() const;
    bool is_even() const;
    Int norm(const ZVec& v) const;

private:
    ZMat gram_;
    std::string label_;
};

std::pair<int, int> signature(const GramLattice& L);

// Discriminant group L^v/L with generator lifts and a coordinate map.
struct DiscriminantForm {
    FiniteQuadraticForm q;
    std::vector<QVec> lifts;  // rational coordinates w.r.t. the lattice basis

    // Generator coordinates of the class of a dual vector.
    std::vector<int64_t> coords(const QVec& x) const;

    ZMat gram;
    ZMat snf_cols;                  // z = x*gram, snf coordinates = z*snf_cols mod snf_d
    std::vector<int64_t> snf_d;
    std::vector<std::vector<int64_t>> snf_to_gen;  // image of each snf generator, empty if identity
};

DiscriminantForm discriminant_form(const GramLattice& L);
// Same group with caller-chosen generator lifts; throws if they do not form a basis.
DiscriminantForm discriminant_form(const GramLattice& L, const std::vector<QVec>& lifts);
// Lifts t_i/k_i with k_i the content of row i, when these form a basis of L^#.
std::optional<DiscriminantForm> natural_discriminant_form(const GramLattice& L);

GramLattice direct_sum(const GramLattice& a, const GramLattice& b);
GramLattice rescale(const GramLattice& L, const Int& n);
// One of A_n, D_n, E_6, E_7, E_8 (negative definite), U, or [k].
GramLattice ade_lattice(const std::string& symbol);
// Sum of summands such as "U + U(2) + [-4]" or "D4^2 E8"; an optional (n) rescales a summand.
GramLattice lattice_from_expression(const std::string& expr);
GramLattice orthogonal_complement(const GramLattice& L, const ZMat& S);

GramLattice read_lattice(std::istream& in, const std::string& source = "<input>");
GramLattice read_lattice_file(const std::string& path);
void write_lattice(std::ostream& out, const GramLattice& L);

}  // namespace k3f
