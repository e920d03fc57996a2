#include <random>

#include "doctest.h"
#include "k3f/finqform.hpp"
#include "test_util.hpp"

using namespace k3f;

TEST_CASE("orders of discriminant orthogonal groups") {
    CHECK(orthogonal_group(discriminant_form(lattice_from_expression("U + U(2)")).q).order() == 2);
    CHECK(orthogonal_group(discriminant_form(lattice_from_expression("U(2)^2")).q).order() == 72);
    CHECK(orthogonal_group(discriminant_form(lattice_from_expression("U + [12]")).q).order() == 4);
    CHECK(orthogonal_group(discriminant_form(ade_lattice("E8")).q).order() == 1);
}

TEST_CASE("exhaustive oracle for small groups") {
    // Independent count: all k x k matrices mod 2 preserving q on every element.
    auto D = discriminant_form(lattice_from_expression("U(2) + A1 + A1"));
    AbelianGroup A(D.q.d);
    int k = D.q.rank();
    REQUIRE(k == 4);
    uint64_t count = 0;
    for (uint32_t code = 0; code < (1u << 16); ++code) {
        FiniteIsometry g;
        g.k = k;
        for (int i = 0; i < 16; ++i) g.m.push_back((code >> i) & 1);
        std::vector<uint32_t> img(A.size());
        bool ok = true;
        std::vector<char> seen(A.size(), 0);
        for (uint32_t x = 0; x < A.size() && ok; ++x) {
            auto c = A.coords(x);
            std::vector<int64_t> y(k, 0);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) y[j] += c[i] * g.at(i, j);
            uint32_t yi = A.index(y);
            if (seen[yi] || D.q.q_num(A.coords(yi)) != D.q.q_num(c)) ok = false;
            seen[yi] = 1;
        }
        if (ok) ++count;
    }
    CHECK(orthogonal_group(D.q).order() == count);
}

TEST_CASE("every group element preserves q and b") {
    auto q = discriminant_form(lattice_from_expression("U(2)^2 + [-4]")).q;
    FiniteOrthGroup G = orthogonal_group(q);
    CHECK(G.order() == 1440);
    for (uint32_t a = 0; a < G.order(); ++a) CHECK(is_isometry(q, G.element(a)));
    for (auto& g : G.generators()) CHECK(G.index_of(g).has_value());
}

TEST_CASE("shipped generators of the order 72 group") {
    auto T = preset_T("oguiso");
    auto D = natural_discriminant_form(T);
    REQUIRE(D.has_value());
    auto gens = preset_isometries("oguiso", "group.txt", 4);
    FiniteOrthGroup G(D->q, gens);
    CHECK(G.order() == 72);
    CHECK(orthogonal_group(D->q).order() == 72);
    auto cc = conjugacy_classes(G);
    CHECK(cc.classes.size() == 9);
    uint64_t total = 0;
    for (auto& c : cc.classes) total += c.size;
    CHECK(total == 72);

    auto K8 = subgroup_generated(G, preset_isometries("oguiso", "K8.txt", 4));
    auto K12 = subgroup_generated(G, preset_isometries("oguiso", "K12.txt", 4));
    auto K36 = subgroup_generated(G, preset_isometries("oguiso", "K36.txt", 4));
    CHECK(K8.order() == 8);
    CHECK(K12.order() == 12);
    CHECK(K36.order() == 36);
    CHECK(is_normal(G, K36));
    CHECK_FALSE(is_normal(G, K8));
    CHECK_FALSE(is_normal(G, K12));
    CHECK(is_conjugate_subgroup(G, K8, K8).has_value());
    CHECK_FALSE(is_conjugate_subgroup(G, K8, K12).has_value());
    CHECK(subgroup_generated(G, std::vector<uint32_t>{G.identity()}).order() == 1);

    auto h = preset_isometries("oguiso", "hodge.txt", 4);
    auto H1 = subgroup_generated(G, {h[0]});
    auto H2 = subgroup_generated(G, {h[1]});
    auto H6 = subgroup_generated(G, {h[3]});
    CHECK(double_coset_count(G, H2, K8) == 6);
    CHECK(double_coset_count(G, H6, K36) == 2);
    CHECK(double_coset_count(G, H1, K12) == 6);
    auto all = subgroup_generated(G, G.generator_indices());
    CHECK(double_coset_count(G, all, all) == 1);
}

TEST_CASE("shipped generators of the order 1440 group") {
    auto D = natural_discriminant_form(preset_T("kloosterman"));
    REQUIRE(D.has_value());
    FiniteOrthGroup G(D->q, preset_isometries("kloosterman", "group.txt", 6));
    CHECK(G.order() == 1440);
    CHECK(orthogonal_group(D->q).order() == 1440);
    CHECK(conjugacy_classes(G).classes.size() == 22);
    for (auto& h : preset_isometries("kloosterman", "hodge.txt", 6)) CHECK(G.index_of(h).has_value());
}

TEST_CASE("isometry testing of finite forms") {
    auto e8 = discriminant_form(ade_lattice("E8")).q;
    CHECK(are_isometric(e8, FiniteQuadraticForm{}).has_value());
    auto w = discriminant_form(lattice_from_expression("D8 E8")).q;
    auto t = discriminant_form(lattice_from_expression("U + U(2)")).q.negated();
    CHECK(are_isometric(w, t).has_value());
    auto a = discriminant_form(lattice_from_expression("[-2]")).q;
    auto b = discriminant_form(lattice_from_expression("[2]")).q;
    CHECK_FALSE(are_isometric(a, b).has_value());
}

TEST_CASE("double coset properties on random subgroup pairs") {
    auto D = natural_discriminant_form(preset_T("kloosterman"));
    FiniteOrthGroup G(D->q, preset_isometries("kloosterman", "group.txt", 6));
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<uint32_t> pick(0, uint32_t(G.order() - 1));
    for (int trial = 0; trial < 12; ++trial) {
        Subgroup H = subgroup_generated(G, std::vector<uint32_t>{pick(rng)});
        std::vector<uint32_t> kg = {pick(rng)};
        if (trial % 2) kg.push_back(pick(rng));
        Subgroup K = subgroup_generated(G, kg);
        std::vector<uint64_t> sizes;
        uint64_t a = double_cosets_partition(G, H, K, &sizes);
        CHECK(a == double_cosets_burnside_serial(G, H, K));
        CHECK(a == double_cosets_burnside(G, H, K));
        uint64_t s = 0;
        for (auto x : sizes) s += x;
        CHECK(s == G.order());
        uint32_t g1 = pick(rng), g2 = pick(rng);
        CHECK(double_coset_count(G, conjugate_subgroup(G, H, g1), conjugate_subgroup(G, K, g2)) == a);
    }
}
