// Case study presets, line-delimited JSON manifests, reference matching and the genus cache.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "k3f/counting.hpp"
#include "k3f/genus.hpp"

namespace k3f {

struct NamedIsometry {
    std::string name;
    FiniteIsometry g;
};

// Blocks of k rows of k integers; a comment line "# name" directly before a block names it.
std::vector<NamedIsometry> read_named_isometries(const std::string& path, int k);

struct ReferenceFrame {
    std::string id;
    std::string roots;
    std::string mw;
    uint64_t root_count = 0;
    Int aut_order;
    std::optional<uint64_t> disc_image_order;
    std::vector<uint64_t> multiplicities;  // one per entry of Reference::hodge_orders
};

struct Reference {
    std::string preset;
    std::vector<uint32_t> hodge_orders;
    size_t classes = 0;
    std::optional<Rat> mass;
    std::vector<ReferenceFrame> frames;
    std::vector<uint64_t> totals;  // one per hodge order
};

Reference read_reference(const std::string& path);

struct Preset {
    std::string name;
    std::string dir;
    GramLattice T;
    GramLattice seed;
    std::vector<NamedIsometry> hodge;  // named Hodge generators shipped with the preset
    std::optional<Reference> reference;
};

const std::vector<std::string>& preset_names();
// Throws InputError for unknown names.
Preset load_preset(const std::string& name);

// Canonical forms used when comparing with reference tables: "A7 A3 A1^2" -> "A1^2 A3 A7".
std::string normalize_roots(const std::string& symbol);
std::string normalize_mw(const std::string& mw);

// For each frame the index of the reference row with the same invariant quadruple
// (roots, MW group, |Delta|, |O(W)|), or -1.
std::vector<int> match_frames(const std::vector<FrameReport>& frames, const Reference& ref);

// Order of O^#(W) inside O(W^#).
uint64_t discriminant_image_order(const GenusClass& W);

// Manifest records, one JSON object per line with a fixed field order. Large integers and
// rationals are strings.
std::string lattice_record(const std::string& name, const Transcendental& T, size_t conjugacy_classes);
std::string genus_record(const GenusList& g);
std::string class_record(const std::string& id, const GenusClass& W, uint64_t disc_image_order);
std::string hodge_record(const HodgeChoice& h, const Transcendental& T);
std::string frame_record(const FrameReport& f, const std::string& reference_id);
std::string total_record(const HodgeChoice& h, uint64_t total, const Bounds& b);

// Generic reader: the "type" field of every record, in file order, plus the raw lines.
struct ManifestLine {
    std::string type;
    std::string text;
};
std::vector<ManifestLine> read_manifest(const std::string& path);

// Genus walks memoized under a cache directory. A cache entry stores the class Gram matrices;
// on load the classes are described again and the mass is checked, a bad entry is recomputed.
std::string genus_cache_key(const GramLattice& seed);
GenusList enumerate_genus_cached(const GramLattice& seed, const WalkOptions& opt, const std::string& cache_dir,
                                 bool* hit = nullptr);

}  // namespace k3f
