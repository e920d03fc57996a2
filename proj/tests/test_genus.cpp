#include <omp.h>

#include <random>

#include "doctest.h"
#include "k3f/definite.hpp"
#include "k3f/genus.hpp"
#include "k3f/mass.hpp"
#include "test_util.hpp"

using namespace k3f;

namespace {

// Random v with v^2 = 0 mod 2p and v not in pL.
ZVec isotropic_mod(const GramLattice& L, long p, std::mt19937_64& rng) {
    int n = L.rank();
    while (true) {
        ZVec v(n);
        bool zero = true;
        for (int i = 0; i < n; ++i) {
            v[i] = long(rng() % uint64_t(p));
            zero = zero && v[i] == 0;
        }
        Int s = L.norm(v);
        if (!zero && s % (2 * p) == 0) return v;
    }
}

}  // namespace

TEST_CASE("frame genus descriptors") {
    auto d = frame_genus_descriptor(lattice_from_expression("U + U(2)"));
    CHECK(d.n_plus == 0);
    CHECK(d.n_minus == 16);
    CHECK(d.q.order() == 4);
    CHECK(frame_genus_descriptor(preset_T("kloosterman")).rank() == 14);
    CHECK(frame_genus_descriptor(preset_T("apery-fermi")).q.order() == 12);
    CHECK_THROWS_AS(frame_genus_descriptor(lattice_from_expression("U + U + U")), InputError);
    CHECK(frame_genus_descriptor(lattice_from_expression("U + U")).q.trivial());
    CHECK_THROWS_AS(frame_genus_descriptor(ade_lattice("A2")), InputError);
}

TEST_CASE("shipped seeds lie in their frame genera") {
    for (auto& name : preset_names()) {
        Preset p = load_preset(name);
        CAPTURE(name);
        CHECK(in_genus(p.seed, frame_genus_descriptor(p.T)));
        CHECK(p.seed.rank() == 20 - p.T.rank());
    }
    CHECK_FALSE(in_genus(load_preset("oguiso").seed, frame_genus_descriptor(preset_T("barth-peters"))));
}

TEST_CASE("U + [12] and not U + [-12]") {
    // Signature (2,1) is only possible with the positive sign.
    auto seed = load_preset("apery-fermi").seed;
    CHECK(in_genus(seed, frame_genus_descriptor(lattice_from_expression("U + [12]"))));
    CHECK_THROWS_AS(frame_genus_descriptor(lattice_from_expression("U + [-12]")), InputError);
}

TEST_CASE("same genus") {
    CHECK(in_same_genus(lattice_from_expression("D8 E8"), ade_lattice("D16")));
    CHECK_FALSE(in_same_genus(lattice_from_expression("E8^2"), ade_lattice("D16")));
    CHECK_FALSE(in_same_genus(ade_lattice("E8"), ade_lattice("D8")));
    CHECK_FALSE(in_same_genus(ade_lattice("A1"), rescale(ade_lattice("A1"), -1)));
    CHECK(in_same_genus(lattice_from_expression("D4^2 E8"), lattice_from_expression("D4 D12")));
}

TEST_CASE("neighbors preserve the genus descriptor") {
    std::mt19937_64 rng(7);
    for (auto expr : {"D8 E8", "D4^2 D6", "A1^2 E7^2", "D11 E6"}) {
        GramLattice L = lattice_from_expression(expr);
        auto d = genus_descriptor(L);
        for (long p : {3L, 5L, 7L}) {
            if (L.det() % p == 0) continue;
            for (int k = 0; k < 4; ++k) {
                GramLattice N = neighbor(L, isotropic_mod(L, p, rng), p);
                CAPTURE(expr);
                CAPTURE(p);
                CHECK(N.det() == L.det());
                CHECK(N.is_even());
                CHECK(signature(N) == signature(L));
                CHECK(in_genus(N, d));
            }
        }
    }
}

TEST_CASE("every 3-neighbor of E8 is isometric to E8") {
    GramLattice E8 = ade_lattice("E8");
    auto all = neighbors(E8, 3);
    CHECK(all.size() == 1120);  // (3^7 + 3^4 - 3^3 - 1) / 2 lines for split O(8) over F_3
    for (size_t i = 0; i < all.size(); i += 37) CHECK(isometric(all[i], E8).has_value());
}

TEST_CASE("E8 genus has one class") {
    GenusList g = enumerate_genus(ade_lattice("E8"));
    REQUIRE(g.classes.size() == 1);
    CHECK(g.mass == Rat(1, 696729600));
    CHECK(g.mass == g.expected_mass);
    CHECK(g.classes[0].roots.symbol() == "E8");
}

TEST_CASE("rank 16 unimodular genus") {
    GenusList g = enumerate_genus(lattice_from_expression("E8^2"));
    REQUIRE(g.classes.size() == 2);
    CHECK(g.mass == g.expected_mass);
    std::vector<std::string> s = {g.classes[0].roots.symbol(), g.classes[1].roots.symbol()};
    std::sort(s.begin(), s.end());
    CHECK(s == std::vector<std::string>{"D16", "E8^2"});
    for (auto& c : g.classes) CHECK(c.lattice.det() == 1);
}

TEST_CASE("walk of the Barth-Peters frame genus") {
    const GenusList& g = preset_genus("barth-peters");
    REQUIRE(g.classes.size() == 6);
    CHECK(g.mass == Rat(Int("505121"), Int("12340763622899712000")));
    CHECK(g.mass == g.expected_mass);
    for (size_t i = 0; i < g.classes.size(); ++i) {
        CHECK(in_genus(g.classes[i].lattice, g.descriptor));
        for (size_t j = i + 1; j < g.classes.size(); ++j)
            CHECK_FALSE(isometric(g.classes[i].lattice, g.classes[j].lattice).has_value());
    }
    // W2 = D16 + glue: 480 roots and |O| = 1371195958099968000
    bool found = false;
    for (auto& c : g.classes)
        if (c.roots.symbol() == "D16") {
            found = true;
            CHECK(c.roots.root_count == 480);
            CHECK(c.aut.order == Int("1371195958099968000"));
            CHECK(c.mw.str() == "0");
        }
    CHECK(found);
}

TEST_CASE("walk of the Oguiso frame genus") {
    const GenusList& g = preset_genus("oguiso");
    CHECK(g.classes.size() == 11);
    CHECK(g.mass == Rat(Int("64150367"), Int("1708721117016883200")));
}

TEST_CASE("walks do not depend on the thread count") {
    GramLattice seed = lattice_from_expression("D4^2 E8");
    int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    GenusList a = enumerate_genus(seed);
    omp_set_num_threads(3);
    GenusList b = enumerate_genus(seed);
    omp_set_num_threads(saved);
    REQUIRE(a.classes.size() == b.classes.size());
    for (size_t i = 0; i < a.classes.size(); ++i) CHECK(a.classes[i].lattice.gram() == b.classes[i].lattice.gram());
    CHECK(a.neighbors_built == b.neighbors_built);
}

TEST_CASE("walk rejects indefinite seeds and bad primes") {
    CHECK_THROWS_AS(enumerate_genus(lattice_from_expression("U + A1")), InputError);
    WalkOptions o;
    o.primes = {2};
    CHECK_THROWS_AS(enumerate_genus(lattice_from_expression("D8 E8"), o), InputError);
    o.primes = {9};
    CHECK_THROWS_AS(enumerate_genus(ade_lattice("E8"), o), InputError);
}
