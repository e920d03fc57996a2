// Finite orthogonal groups of finite quadratic forms.
#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "k3f/lattice.hpp"

namespace k3f {

// Enumeration of the finite abelian group underlying a form, in mixed radix.
class AbelianGroup {
public:
    AbelianGroup() = default;
    explicit AbelianGroup(std::vector<int64_t> d);
    uint32_t size() const { return size_; }
    int rank() const { return int(d_.size()); }
    const std::vector<int64_t>& invariants() const { return d_; }
    std::vector<int64_t> coords(uint32_t idx) const;
    uint32_t index(const std::vector<int64_t>& x) const;  // x reduced or not
    uint32_t generator(int i) const;
    uint32_t add(uint32_t a, uint32_t b) const;
    uint32_t scale(uint32_t a, int64_t n) const;

private:
    std::vector<int64_t> d_;
    uint32_t size_ = 1;
};

// Row convention: row i holds the coordinates of the image of generator i.
struct FiniteIsometry {
    int k = 0;
    std::vector<int64_t> m;  // k*k entries
    int64_t& at(int i, int j) { return m[size_t(i) * k + j]; }
    int64_t at(int i, int j) const { return m[size_t(i) * k + j]; }
    static FiniteIsometry identity(int k);
    static FiniteIsometry from_rows(const std::vector<std::vector<int64_t>>& rows);
    bool operator==(const FiniteIsometry& o) const { return k == o.k && m == o.m; }
    std::string str() const;
};

using Perm = std::vector<uint32_t>;

class FiniteOrthGroup {
public:
    // Closure of the generators inside O(q); throws InputError if some generator is not an isometry.
    FiniteOrthGroup(FiniteQuadraticForm q, const std::vector<FiniteIsometry>& gens);

    const FiniteQuadraticForm& form() const { return q_; }
    const AbelianGroup& group() const { return A_; }
    size_t order() const { return elems_.size(); }
    const std::vector<uint32_t>& generator_indices() const { return gens_; }
    std::vector<FiniteIsometry> generators() const;

    uint32_t identity() const { return 0; }
    uint32_t mul(uint32_t a, uint32_t b) const;  // apply a, then b
    uint32_t inv(uint32_t a) const { return inv_[a]; }
    uint32_t element_order(uint32_t a) const;
    const Perm& perm(uint32_t a) const { return elems_[a]; }
    FiniteIsometry element(uint32_t a) const;
    std::optional<uint32_t> index_of(const FiniteIsometry& g) const;
    std::optional<uint32_t> index_of_perm(const Perm& p) const;
    Perm to_perm(const FiniteIsometry& g) const;
    bool has_table() const { return !table_.empty(); }

private:
    friend class FiniteOrthGroupBuilder;
    FiniteOrthGroup() = default;
    void close(const std::vector<Perm>& gens);
    void build_table();
    std::vector<uint32_t> key(const Perm& p) const;

    FiniteQuadraticForm q_;
    AbelianGroup A_;
    std::vector<Perm> elems_;
    std::vector<uint32_t> gens_;
    std::vector<uint32_t> inv_;
    std::vector<uint32_t> table_;
    struct KeyHash {
        size_t operator()(const std::vector<uint32_t>& v) const;
    };
    std::unordered_map<std::vector<uint32_t>, uint32_t, KeyHash> lookup_;
};

struct EnumerationOptions {
    uint64_t cap = 100000000;  // candidate matrices visited before giving up
};

// Full O(q) by backtracking over images of generators.
FiniteOrthGroup orthogonal_group(const FiniteQuadraticForm& q, const EnumerationOptions& opt = {});
// An isometry q1 -> q2 in the generator coordinates of q1 (images expressed in q2's coordinates).
std::optional<FiniteIsometry> are_isometric(const FiniteQuadraticForm& q1, const FiniteQuadraticForm& q2,
                                            const EnumerationOptions& opt = {});
bool is_isometry(const FiniteQuadraticForm& q, const FiniteIsometry& g);

struct ConjugacyClass {
    uint32_t representative;
    uint32_t size;
    uint32_t element_order;
};
struct ConjugacyClasses {
    std::vector<ConjugacyClass> classes;
    std::vector<uint32_t> class_of;  // element index -> class number
};
ConjugacyClasses conjugacy_classes(const FiniteOrthGroup& G);

struct Subgroup {
    std::vector<uint32_t> gens;
    std::vector<uint32_t> elements;  // sorted
    size_t order() const { return elements.size(); }
    bool contains(uint32_t g) const;
};
Subgroup subgroup_generated(const FiniteOrthGroup& G, const std::vector<uint32_t>& gens);
Subgroup subgroup_generated(const FiniteOrthGroup& G, const std::vector<FiniteIsometry>& gens);
Subgroup conjugate_subgroup(const FiniteOrthGroup& G, const Subgroup& K, uint32_t g);  // g^-1 K g
bool is_normal(const FiniteOrthGroup& G, const Subgroup& K);
std::optional<uint32_t> is_conjugate_subgroup(const FiniteOrthGroup& G, const Subgroup& K1, const Subgroup& K2);

// Double cosets H\G/K.
uint64_t double_cosets_partition(const FiniteOrthGroup& G, const Subgroup& H, const Subgroup& K,
                                 std::vector<uint64_t>* sizes = nullptr);
uint64_t double_cosets_burnside_serial(const FiniteOrthGroup& G, const Subgroup& H, const Subgroup& K);
uint64_t double_cosets_burnside(const FiniteOrthGroup& G, const Subgroup& H, const Subgroup& K);
// Both routes; a disagreement raises InternalError.
uint64_t double_coset_count(const FiniteOrthGroup& G, const Subgroup& H, const Subgroup& K);

// Subgroup data files: blocks of k rows of k integers separated by blank lines.
std::vector<FiniteIsometry> read_isometries(const std::string& path, int k);
std::vector<FiniteIsometry> parse_isometries(const std::string& text, int k, const std::string& source);

}  // namespace k3f
