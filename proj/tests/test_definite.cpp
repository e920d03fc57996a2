#include <random>

#include "doctest.h"
#include "k3f/definite.hpp"
#include "k3f/mass.hpp"

using namespace k3f;

namespace {

ZMat random_unimodular(int n, std::mt19937_64& rng) {
    ZMat u = ZMat::identity(n);
    std::uniform_int_distribution<int> pick(0, n - 1), coef(-2, 2);
    for (int step = 0; step < 4 * n; ++step) {
        int i = pick(rng), j = pick(rng);
        if (i == j) continue;
        int c = coef(rng);
        for (int k = 0; k < n; ++k) u(i, k) += c * u(j, k);
    }
    return u;
}

GramLattice transform(const GramLattice& L, const ZMat& u) { return GramLattice(u * L.gram() * u.transpose()); }

}  // namespace

TEST_CASE("short vectors against a brute-force box") {
    auto A2 = ade_lattice("A2");
    CHECK(short_vectors(A2, 2).size() == 3);
    // brute force over coefficients in [-2, 2]^2, counting one of each pair
    int count = 0;
    for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b) {
            int nrm = 2 * a * a - 2 * a * b + 2 * b * b;
            if ((a || b) && nrm <= 2) ++count;
        }
    CHECK(count == 6);
    CHECK(short_vectors(ade_lattice("A1"), 2).size() == 1);
    CHECK(short_vectors(ade_lattice("E8"), 2).size() == 120);
    CHECK(short_vectors(ade_lattice("E8"), 4).size() == 120 + 1080);
    CHECK(short_vectors(ade_lattice("D16"), 2).size() == 240);
    CHECK_THROWS_AS(short_vectors(ade_lattice("U"), 2), InputError);
}

TEST_CASE("short vectors are basis independent") {
    std::mt19937_64 rng(5);
    for (const char* e : {"D4 A3", "E6 [-4]", "A2^3", "D8 E8"}) {
        GramLattice L = lattice_from_expression(e);
        for (int t = 0; t < 3; ++t) {
            GramLattice M = transform(L, random_unimodular(L.rank(), rng));
            CHECK(short_vectors(M, 4).size() == short_vectors(L, 4).size());
        }
    }
}

TEST_CASE("lll output is unimodular and reduced in size") {
    std::mt19937_64 rng(9);
    GramLattice L = lattice_from_expression("E8 D4");
    GramLattice M = transform(L, random_unimodular(L.rank(), rng));
    ZMat T = lll_transform(positive_gram(M));
    Int d = determinant(T);
    CHECK((d == 1 || d == -1));
    ZMat R = T * positive_gram(M) * T.transpose();
    for (int i = 0; i < R.rows(); ++i) CHECK(R(i, i) <= 4);
}

TEST_CASE("root systems and frames") {
    auto R = root_classification(lattice_from_expression("D8 E8"));
    CHECK(R.symbol() == "D8 E8");
    CHECK(R.root_count == 352);
    CHECK(weyl_group_order(R) == Int(5160960) * 696729600);
    auto D16 = root_classification(ade_lattice("D16"));
    CHECK(D16.symbol() == "D16");
    CHECK(D16.root_count == 480);
    CHECK(root_classification(lattice_from_expression("[-4] + [-6]")).symbol() == "0");
    CHECK(root_classification(lattice_from_expression("A1 A1 E7 E7")).symbol() == "A1^2 E7^2");
    GramLattice W = lattice_from_expression("D8 E8");
    CHECK(mordell_weil(W, R).str() == "0");
    GramLattice X = lattice_from_expression("A2 [-4]");
    CHECK(mordell_weil(X, root_classification(X)).str() == "Z");
}

TEST_CASE("root lattices found inside a random basis") {
    std::mt19937_64 rng(17);
    for (const char* e : {"A1 A2 A3", "D4 D5", "E6 A2", "E7 A1", "D6 [-4]"}) {
        GramLattice L = lattice_from_expression(e);
        GramLattice M = transform(L, random_unimodular(L.rank(), rng));
        auto R0 = root_classification(L), R1 = root_classification(M);
        CHECK(R0.symbol() == R1.symbol());
        CHECK(R0.root_count == R1.root_count);
        // simple roots have the Cartan matrix of the reported type
        ZMat C = R1.simple_roots * positive_gram(M) * R1.simple_roots.transpose();
        for (int i = 0; i < C.rows(); ++i) CHECK(C(i, i) == 2);
    }
}

TEST_CASE("simple reflections act trivially on the discriminant") {
    GramLattice W = lattice_from_expression("D4 A2 [-6]");
    auto R = root_classification(W);
    auto D = discriminant_form(W);
    for (int i = 0; i < R.simple_roots.rows(); ++i) {
        ZMat s = reflection(W, R.simple_roots.row(i));
        CHECK(is_automorphism(W, s));
        CHECK(discriminant_action(D, s) == FiniteIsometry::identity(D.q.rank()));
    }
}

TEST_CASE("automorphism group of A2 by exhaustion") {
    GramLattice A2 = ade_lattice("A2");
    int count = 0;
    for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b)
            for (int c = -2; c <= 2; ++c)
                for (int d = -2; d <= 2; ++d) {
                    ZMat g = ZMat::from_rows({{a, b}, {c, d}});
                    if (is_automorphism(A2, g)) ++count;
                }
    CHECK(count == 12);
    CHECK(automorphism_group(A2).order == 12);
    CHECK(automorphism_group_search(A2).order == 12);
    CHECK(automorphism_group(ade_lattice("A1")).order == 2);
}

TEST_CASE("chamber route agrees with the generic search") {
    for (const char* e : {"A2", "D4", "E6", "E8", "A1 A1 A2", "D4 [-4]", "A3 [-6]"}) {
        GramLattice L = lattice_from_expression(e);
        auto a = automorphism_group(L);
        auto b = automorphism_group_search(L);
        CHECK_MESSAGE(a.order == b.order, e);
        for (auto& g : a.generators) CHECK(is_automorphism(L, g));
        for (auto& g : b.generators) CHECK(is_automorphism(L, g));
    }
    CHECK(automorphism_group(ade_lattice("D4")).order == 1152);
    CHECK(automorphism_group(ade_lattice("E8")).order == 696729600);
    CHECK(automorphism_group_search(rescale(ade_lattice("E8"), 2)).order == 696729600);
    CHECK(automorphism_group(lattice_from_expression("[-4] + [-6]")).order == 4);
}

TEST_CASE("automorphism groups of the rank 16 unimodular lattices") {
    CHECK(automorphism_group(lattice_from_expression("D8 E8")).order == Int("7191587192832000"));
    CHECK(automorphism_group(ade_lattice("D16")).order == Int("1371195958099968000"));
}

TEST_CASE("isometry testing") {
    std::mt19937_64 rng(23);
    GramLattice A = lattice_from_expression("D8 E8"), B = ade_lattice("D16");
    CHECK(!isometric(A, B));
    for (const char* e : {"D4 A2 [-6]", "E7 A1", "[-4] + [-6] + A2"}) {
        GramLattice L = lattice_from_expression(e);
        GramLattice M = transform(L, random_unimodular(L.rank(), rng));
        auto g = isometric(L, M);
        REQUIRE(g);
        CHECK(g.value() * M.gram() * g.value().transpose() == L.gram());
        auto h = isometric_search(L, M);
        REQUIRE(h);
        CHECK(h.value() * M.gram() * h.value().transpose() == L.gram());
    }
    CHECK(isometric(lattice_from_expression("A1 A1 [-4]"), lattice_from_expression("A1 [-2] + [-4]")));
    CHECK(!isometric(lattice_from_expression("A3 A1"), lattice_from_expression("A1 A1 A1 A1")));
}

TEST_CASE("automorphisms of E8 act trivially on the discriminant") {
    GramLattice E8 = ade_lattice("E8");
    auto D = discriminant_form(E8);
    auto img = discriminant_image(D, automorphism_group(E8).generators);
    CHECK(img.order() == 1);
}
