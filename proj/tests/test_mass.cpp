#include "doctest.h"
#include "k3f/mass.hpp"

using namespace k3f;

TEST_CASE("bernoulli numbers") {
    auto B = bernoulli_numbers(12);
    CHECK(B[1] == Rat(-1, 2));
    CHECK(B[2] == Rat(1, 6));
    CHECK(B[3] == 0);
    CHECK(B[12] == Rat(-691, 2730));
}

TEST_CASE("mass of unimodular and frame genera") {
    CHECK(mass(ade_lattice("E8")) == Rat(1, 696729600));
    CHECK(mass(lattice_from_expression("D8 E8")) == Rat(Int("505121"), Int("12340763622899712000")));
    CHECK(mass(lattice_from_expression("D4^2 E8")) == Rat(Int("64150367"), Int("1708721117016883200")));
    CHECK(mass(lattice_from_expression("D4^2 D6")) == Rat(Int("1306681"), Int("64210599936000")));
    CHECK(mass(lattice_from_expression("D11 E6")) == Rat(Int("123970110547"), Int("1110668726060974080000")));
}

TEST_CASE("mass agrees with automorphism orders of one- and two-class genera") {
    // A1, A2, D4 are alone in their genera; |O| = 2, 12, 1152
    CHECK(mass(ade_lattice("A1")) == Rat(1, 2));
    CHECK(mass(ade_lattice("A2")) == Rat(1, 12));
    CHECK(mass(ade_lattice("D4")) == Rat(1, 1152));
    // rank 16 unimodular: E8^2 with |O| = 2 |W(E8)|^2, and D16+ with |O| = 2^15 16!
    Int w = 696729600, f16 = 1;
    for (int i = 2; i <= 16; ++i) f16 *= i;
    Rat expect = Rat(Int(1), 2 * w * w) + Rat(Int(1), Int(32768) * f16);
    CHECK(mass(lattice_from_expression("E8^2")) == expect);
    CHECK(mass(rescale(ade_lattice("E8"), -1)) == mass(ade_lattice("E8")));
    CHECK_THROWS_AS(mass(ade_lattice("U")), InputError);
}

TEST_CASE("jordan constituents") {
    auto J = jordan_decomposition(lattice_from_expression("U(2)^2 + [-4]").gram(), 2);
    REQUIRE(J.size() == 3);
    CHECK(J[0].dim == 0);
    CHECK(J[1].dim == 4);
    CHECK_FALSE(J[1].odd);
    CHECK(J[2].dim == 1);
    CHECK(J[2].odd);
    auto J3 = jordan_decomposition(ade_lattice("A2").gram(), 3);
    REQUIRE(J3.size() == 2);
    CHECK(J3[0].dim == 1);
    CHECK(J3[1].dim == 1);
}
