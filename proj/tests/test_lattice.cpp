#include <random>
#include <sstream>

#include "doctest.h"
#include "k3f/finqform.hpp"
#include "k3f/lattice.hpp"

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

TEST_CASE("signature by exact elimination") {
    CHECK(signature(ade_lattice("U")) == std::pair<int, int>{1, 1});
    CHECK(signature(ade_lattice("E8")) == std::pair<int, int>{0, 8});
    CHECK(signature(lattice_from_expression("U + U(2)")) == std::pair<int, int>{2, 2});
    CHECK(signature(lattice_from_expression("U + [12]")) == std::pair<int, int>{2, 1});
    CHECK_THROWS_WITH_AS(GramLattice(ZMat::from_rows({{2, 2}, {2, 2}})), "degenerate lattice", InputError);
}

TEST_CASE("signature is invariant under unimodular basis change") {
    std::mt19937_64 rng(7);
    for (const char* e : {"U + U(2)", "U(2)^2 + [-4]", "D4 E6", "U + [12]", "A3 + U(3)"}) {
        GramLattice L = lattice_from_expression(e);
        auto s = signature(L);
        for (int t = 0; t < 5; ++t) CHECK(signature(transform(L, random_unimodular(L.rank(), rng))) == s);
    }
}

TEST_CASE("discriminant forms of small lattices") {
    auto e8 = discriminant_form(ade_lattice("E8"));
    CHECK(e8.q.trivial());

    auto a1 = discriminant_form(ade_lattice("A1"));
    REQUIRE(a1.q.d == std::vector<int64_t>{2});
    CHECK(a1.q.q_value({1}) == Rat(3, 2));

    auto u2 = discriminant_form(rescale(ade_lattice("U"), 2));
    REQUIRE(u2.q.d == std::vector<int64_t>{2, 2});
    CHECK(u2.q.q_value({1, 0}) == 0);
    CHECK(u2.q.q_value({0, 1}) == 0);
    CHECK(u2.q.b_value({1, 0}, {0, 1}) == Rat(1, 2));

    auto d11e6 = discriminant_form(lattice_from_expression("D11 E6"));
    CHECK(d11e6.q.d == std::vector<int64_t>{12});

    CHECK_THROWS_AS(discriminant_form(GramLattice(ZMat::from_rows({{1}}))), InputError);
}

TEST_CASE("rescale and direct sum constructors") {
    CHECK(rescale(ade_lattice("U"), 2).gram() == ZMat::from_rows({{0, 2}, {2, 0}}));
    ZMat bp = ZMat::from_rows({{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 2}, {0, 0, 2, 0}});
    CHECK(direct_sum(ade_lattice("U"), rescale(ade_lattice("U"), 2)).gram() == bp);
    CHECK_THROWS_AS(rescale(ade_lattice("U"), 0), InputError);
    CHECK_THROWS_AS(ade_lattice("D3"), InputError);
    CHECK_THROWS_AS(ade_lattice("E9"), InputError);
    CHECK(GramLattice().rank() == 0);
    CHECK(direct_sum(GramLattice(), ade_lattice("A2")).gram() == ade_lattice("A2").gram());
}

TEST_CASE("orthogonal complements") {
    GramLattice ue8 = lattice_from_expression("U + E8");
    ZMat S(2, 10, Int(0));
    S(0, 0) = 1;
    S(1, 1) = 1;
    GramLattice c = orthogonal_complement(ue8, S);
    CHECK(c.rank() == 8);
    CHECK(c.det() == 1);
    CHECK(signature(c) == std::pair<int, int>{0, 8});

    GramLattice m = lattice_from_expression("[-4] + [-2]");
    ZMat s1(1, 2, Int(0));
    s1(0, 0) = 1;
    CHECK(orthogonal_complement(m, s1).gram() == ZMat::from_rows({{-2}}));

    // brute force: x*(1,1) = 0 in A1 + A1 means x0 = x1, spanned by (1,1) of norm -4
    GramLattice a1a1 = lattice_from_expression("A1^2");
    ZMat s2 = ZMat::from_rows({{1, 1}});
    int count = 0;
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b)
            if (-2 * a - 2 * b == 0 && (a || b)) ++count;
    CHECK(count == 6);
    CHECK(orthogonal_complement(a1a1, s2).gram() == ZMat::from_rows({{-4}}));
}

TEST_CASE("discriminant group order equals |det| and q denominators divide 2*exponent") {
    std::mt19937_64 rng(11);
    for (const char* e : {"U(2)^2 + [-4]", "D4^2 D7", "A7^2", "A2 A5 [6]", "U + [12]", "E6^2 [-4]"}) {
        GramLattice L = lattice_from_expression(e);
        auto D = discriminant_form(L);
        CHECK(Int(static_cast<unsigned long>(D.q.order())) == abs(L.det()));
        AbelianGroup A(D.q.d);
        for (uint32_t x = 0; x < A.size(); ++x) {
            Rat q = D.q.q_value(A.coords(x));
            CHECK((2 * D.q.e) % q.get_den().get_si() == 0);
        }
        for (auto& g : D.lifts) {
            auto z = mul(g, L.gram());
            for (auto& v : z) CHECK(v.get_den() == 1);
        }
        // basis change does not change the isometry class
        auto D2 = discriminant_form(transform(L, random_unimodular(L.rank(), rng)));
        CHECK(are_isometric(D.q, D2.q).has_value());
    }
}

TEST_CASE("discriminant form of a direct sum is the sum of discriminant forms") {
    std::vector<std::pair<const char*, const char*>> pairs = {
        {"D4", "A3"}, {"U(2)", "[-2]"}, {"A2", "A2"}, {"D8", "E7"}, {"[12]", "U(2)"}};
    for (auto [a, b] : pairs) {
        GramLattice La = lattice_from_expression(a), Lb = lattice_from_expression(b);
        auto sum = discriminant_form(direct_sum(La, Lb)).q;
        auto parts = FiniteQuadraticForm::direct_sum(discriminant_form(La).q, discriminant_form(Lb).q);
        CHECK(are_isometric(sum, parts).has_value());
    }
}

TEST_CASE("lattice files") {
    std::istringstream in("# comment\n2\n0 1\n1 0\n");
    GramLattice L = read_lattice(in);
    CHECK(L.gram() == ade_lattice("U").gram());
    std::istringstream bad("2\n0 1\n1 x\n");
    CHECK_THROWS_WITH_AS(read_lattice(bad, "f"), "f:3: not an integer: x", InputError);
    std::ostringstream out;
    write_lattice(out, L);
    CHECK(out.str() == "2\n0 1\n1 0\n");
}

TEST_CASE("natural discriminant bases") {
    auto D = natural_discriminant_form(lattice_from_expression("U(2)^2 + [-4]"));
    REQUIRE(D.has_value());
    CHECK(D->q.d == std::vector<int64_t>{2, 2, 2, 2, 4});
    CHECK(D->q.q_value({0, 0, 0, 0, 1}) == Rat(7, 4));
    // class of t5/2 is twice the generator
    QVec x(5, Rat(0));
    x[4] = Rat(1, 2);
    CHECK(D->coords(x) == std::vector<int64_t>{0, 0, 0, 0, 2});
}
