// Genus descriptors, Kneser neighbors and mass-certified genus enumeration.
#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "k3f/definite.hpp"
#include "k3f/lattice.hpp"

namespace k3f {

struct GenusDescriptor {
    int n_plus = 0, n_minus = 0;
    FiniteQuadraticForm q;
    Int det;
    int rank() const { return n_plus + n_minus; }
    std::string describe() const;
};

GenusDescriptor genus_descriptor(const GramLattice& L);
// Genus of definite lattices of rank 20 - rank(T) with discriminant form -q_T.
GenusDescriptor frame_genus_descriptor(const GramLattice& T);
bool in_genus(const GramLattice& L, const GenusDescriptor& g);
bool in_same_genus(const GramLattice& a, const GramLattice& b);

// The p-neighbor L_v + Z v/p for v with v^2 = 0 mod 2p and v not in pL (v is lifted to
// v^2 = 0 mod 2p^2 first). Requires p prime not dividing det(L). The result is LLL reduced.
GramLattice neighbor(const GramLattice& L, const ZVec& v, long p);
// Neighbors of every isotropic line of L/pL; throws ResourceCap past max_lines.
std::vector<GramLattice> neighbors(const GramLattice& L, long p, uint64_t max_lines = 2000000);

struct GenusClass {
    GramLattice lattice;
    RootDecomposition decomposition;
    RootDatum roots;
    MordellWeil mw;
    AutomorphismGroup aut;
};

struct WalkOptions {
    std::vector<long> primes;  // empty: smallest odd primes coprime to det, added on stalls
    uint64_t seed = 1;
    int batch = 256;            // neighbors per round
    int stall_rounds = 40;      // rounds without a new class before adding a prime
    int max_primes = 3;
    SearchOptions search;
    std::function<void(const std::string&)> progress;
};

struct GenusList {
    GenusDescriptor descriptor;
    std::vector<GenusClass> classes;
    Rat mass;                 // sum of 1/|O(W)| over classes
    Rat expected_mass;        // analytic mass
    std::vector<long> primes;  // primes actually used
    uint64_t neighbors_built = 0;
};

// Walks neighbor graphs from the seed until the classes found account for the full mass.
// Throws MassCheckFailure("genus walk incomplete; try additional primes") on failure.
GenusList enumerate_genus(const GramLattice& seed, const WalkOptions& opt = {});

// Invariants used to sort classes and to match them with reference tables.
GenusClass describe_class(const GramLattice& W, const SearchOptions& opt = {});
void sort_classes(std::vector<GenusClass>& classes);

}  // namespace k3f
