// Definite lattices: reduction, short vectors, root systems, automorphisms and isometries.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "k3f/finqform.hpp"
#include "k3f/lattice.hpp"

namespace k3f {

struct SearchOptions {
    uint64_t cap = 200000000;  // backtracking nodes before giving up
};

// Integral LLL (delta = 3/4) on a positive definite Gram matrix.
// Returns a unimodular T such that T * gram * T^t is reduced.
ZMat lll_transform(const ZMat& gram);

// All x != 0 with x G x^t <= bound for positive definite G, one of each pair +-x,
// sorted by norm and then lexicographically.
std::vector<ZVec> short_vectors_positive(const ZMat& gram, const Int& bound);

// Vectors with |v^2| <= bound of a definite lattice, one of each pair; throws on indefinite input.
std::vector<ZVec> short_vectors(const GramLattice& L, const Int& bound);

// Gram matrix with the sign flipped if needed so that it is positive definite.
ZMat positive_gram(const GramLattice& L);

struct RootComponent {
    char type = 'A';
    int rank = 0;
    std::vector<int> nodes;  // indices into RootDatum::simple_roots
};

struct RootDatum {
    uint64_t root_count = 0;
    std::vector<RootComponent> components;  // sorted by type and rank
    ZMat simple_roots;                      // rows in lattice coordinates
    std::string symbol() const;             // e.g. "A1^2 E7^2"; "0" when there are no roots
};

RootDatum root_classification(const GramLattice& W);
Int weyl_group_order(const RootDatum& R);

struct MordellWeil {
    int free_rank = 0;
    std::vector<Int> torsion;  // invariant factors > 1
    std::string str() const;   // e.g. "Z + Z/2", "0"
};

MordellWeil mordell_weil(const GramLattice& W, const RootDatum& R);

// Root sublattice W_root, its orthogonal complement C and the glue W / (W_root + C).
struct RootDecomposition {
    GramLattice lattice;
    int n = 0, r = 0, m = 0;
    ZMat G;  // positive Gram
    RootDatum R;
    IMat Pi, Cb;  // simple roots and a basis of C, rows in lattice coordinates
    IMat GPi;     // Gram of the simple roots
    ZMat GC;      // Gram of C
    ZMat B0;      // rows Pi then Cb
    QMat B0inv;
    std::vector<QVec> glue;  // generators of the glue group in B0 coordinates
    Int N = 1;               // common denominator of glue
};

RootDecomposition root_decomposition(const GramLattice& W);

// Matrices act on row vectors: x -> x * g, and satisfy g * gram * g^t = gram.
struct AutomorphismGroup {
    std::vector<ZMat> generators;
    Int order;
    // Automorphisms fixing the chosen Weyl chamber; together with the simple reflections
    // they generate the group. Empty when the group was computed by the generic search.
    std::vector<ZMat> chamber_stabilizer;
};

// Generic backtracking over images of a reduced basis with a stabilizer chain.
AutomorphismGroup automorphism_group_search(const GramLattice& W, const SearchOptions& opt = {});
// Weyl group times the stabilizer of a Weyl chamber; falls back to the generic search without roots.
AutomorphismGroup automorphism_group(const GramLattice& W, const SearchOptions& opt = {});
AutomorphismGroup automorphism_group(const RootDecomposition& W, const SearchOptions& opt = {});

// Every isometry A -> B (rows are images of A's basis in B's coordinates), up to a cap.
std::vector<ZMat> all_isometries(const GramLattice& A, const GramLattice& B, const SearchOptions& opt = {});
// One isometry A -> B, or none. Uses the chamber decomposition when roots exist.
std::optional<ZMat> isometric(const GramLattice& A, const GramLattice& B, const SearchOptions& opt = {});
std::optional<ZMat> isometric(const RootDecomposition& A, const RootDecomposition& B, const SearchOptions& opt = {});
std::optional<ZMat> isometric_search(const GramLattice& A, const GramLattice& B, const SearchOptions& opt = {});

bool is_automorphism(const GramLattice& W, const ZMat& g);
ZMat reflection(const GramLattice& W, const ZVec& root);

// Action of a lattice automorphism on the generators of a discriminant form.
FiniteIsometry discriminant_action(const DiscriminantForm& D, const ZMat& g);
// The image O^#(W) inside O(W^#), as the group generated by the images of gens.
FiniteOrthGroup discriminant_image(const DiscriminantForm& D, const std::vector<ZMat>& gens);

}  // namespace k3f
