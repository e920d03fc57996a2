// Multiplicities of frames: Hodge image subgroups H, frame images K and |H\G/K|.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "k3f/finqform.hpp"
#include "k3f/genus.hpp"

namespace k3f {

// The transcendental lattice T together with G = O(T^#). The natural basis t_i/k_i of T^# is
// used when it is a basis, so that matrices read from data files apply directly.
class Transcendental {
public:
    explicit Transcendental(GramLattice T, const EnumerationOptions& opt = {});
    const GramLattice& lattice() const { return T_; }
    const DiscriminantForm& disc() const { return D_; }
    const FiniteOrthGroup& group() const { return *G_; }
    bool natural_basis() const { return natural_; }
    // Image of an integral isometry of T in G.
    uint32_t image(const ZMat& g) const;
    uint32_t minus_identity() const { return minus_id_; }

private:
    GramLattice T_;
    DiscriminantForm D_;
    std::shared_ptr<const FiniteOrthGroup> G_;
    bool natural_ = false;
    uint32_t minus_id_ = 0;
};

// Euler totient.
long totient(long n);

struct HodgeSearchOptions {
    int entry_bound = 10;
    int kernel_size = 2;       // assumed order of the kernel of O_hdg(T) -> O(T^#)
    int max_rank = 6;          // lift search is skipped above this rank
    int max_generic_rank = 4;  // rank limit when phi(n) > 2
    uint64_t max_candidates = 0;  // partial lifts visited per order before ResourceCap, 0 for no limit
    bool parallel = true;
};

struct HodgeCandidate {
    uint32_t order = 1;   // order of the image in G
    long lift_order = 2;  // order n of the integral lift, Phi_n(lift) = 0
    uint32_t generator = 0;
    Subgroup subgroup;
    ZMat lift;
};

struct HodgeLiftOrder {
    long n = 2;
    enum class Status { searched, no_image_order, rank_limit } status = Status::searched;
    uint64_t lifts = 0;  // integral lifts found within the bound
};

struct HodgeSearch {
    int entry_bound = 10;
    int kernel_size = 2;
    std::vector<HodgeLiftOrder> orders;
    // One entry per conjugacy class of image subgroups, sorted by order.
    std::vector<HodgeCandidate> candidates;
};

// Integral A with A T A^t = T, Phi_n(A) = 0 and entries in [-bound, bound], for even n with
// phi(n) | rank T. Lifts whose image has order m with n / m > kernel_size are discarded.
HodgeSearch hodge_candidates(const Transcendental& T, const HodgeSearchOptions& opt = {});
// All lifts of one order n within the bound (rows of the search, unsorted images dropped).
std::vector<ZMat> hodge_lifts(const GramLattice& T, long n, int entry_bound, bool parallel = true,
                              uint64_t max_candidates = 0);

struct HodgeSpec {
    enum class Mode { enumerate, order, generator } mode = Mode::enumerate;
    uint32_t order = 0;
    FiniteIsometry generator;
    HodgeSearchOptions search;
};

struct HodgeChoice {
    std::string label;  // e.g. "|H| = 2"
    HodgeCandidate candidate;
};

// Concrete subgroups H for a specification. For odd rank only +-id are Hodge isometries.
std::vector<HodgeChoice> resolve_hodge(const Transcendental& T, const HodgeSpec& spec);

// The image of O^#(W) in G, transported by a fixed isometry W^# -> T^#(-1).
struct FrameImage {
    FiniteIsometry transport;  // rows: images of the generators of W^# in T^# coordinates
    Subgroup K;
};
FrameImage frame_image(const Transcendental& T, const GenusClass& W);
// Same with the transport post-composed with the element g of G.
FrameImage frame_image(const Transcendental& T, const GenusClass& W, uint32_t g);

uint64_t multiplicity(const Transcendental& T, const Subgroup& H, const Subgroup& K);

struct FrameReport {
    std::string id;
    std::string roots;
    MordellWeil mw;
    uint64_t root_count = 0;
    Int aut_order;
    uint64_t disc_image_order = 0;
    std::vector<uint64_t> multiplicities;  // one per Hodge choice
};

struct Bounds {
    uint64_t lower = 0, upper = 0;
    bool tight() const { return lower == upper; }
};

struct CountResult {
    std::vector<HodgeChoice> hodge;
    std::vector<FrameReport> frames;
    std::vector<uint64_t> totals;  // one per Hodge choice
    std::vector<Bounds> bounds;
};

// Multiplicities of the classes of a frame genus for each Hodge choice.
CountResult count_fibrations(const Transcendental& T, const GenusList& genus, const std::vector<HodgeChoice>& hodge);
// Full pipeline starting from the seed of the frame genus.
CountResult count_fibrations(const Transcendental& T, const GramLattice& seed, const HodgeSpec& spec,
                             const WalkOptions& walk = {});
Bounds uniform_bounds(const Transcendental& T, size_t genus_size, const Subgroup& H);

}  // namespace k3f
