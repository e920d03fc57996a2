// Exact Smith-Minkowski-Siegel mass of a definite even lattice (Conway-Sloane local recipe).
#pragma once

#include <vector>

#include "k3f/lattice.hpp"

namespace k3f {

// Bernoulli numbers B_0..B_n with B_1 = -1/2.
std::vector<Rat> bernoulli_numbers(int n);

// One p-adic Jordan constituent p^scale * U with U unimodular.
struct JordanBlock {
    int scale = 0;
    int dim = 0;
    bool odd = false;  // p = 2 only: U has an odd diagonal entry
    Rat det;           // det U, a p-adic unit
    int octane = 0;    // p = 2 only
};

// Constituents indexed by scale 0..max, empty ones included.
std::vector<JordanBlock> jordan_decomposition(const ZMat& gram, long p);

// Sum of 1/|O(L)| over the genus of a definite even lattice L (either sign).
Rat mass(const GramLattice& L);

}  // namespace k3f
