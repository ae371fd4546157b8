// Expression front end: grammar, error positions, display round-trips.

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "geotherm/parse.hpp"

using namespace geotherm;

namespace {

struct Rng {
    std::mt19937 eng;
    explicit Rng(std::uint32_t seed) : eng(seed) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (eng() * (1.0 / 4294967296.0));
    }
    int pick(int n) { return static_cast<int>(eng() % static_cast<std::uint32_t>(n)); }
};

}  // namespace

TEST_CASE("basic grammar") {
    const GenPoly p = poly_parse("2*S^(1/2) - Q");
    REQUIRE(p.term_count() == 2);
    CHECK(p.eval(EvalPoint{{kS, 4.0}, {kQ, 1.0}}) == Catch::Approx(3.0));

    // bare variable, implicit coefficient 1 and exponent 1
    CHECK(poly_parse("S").eval(EvalPoint{{kS, 5.0}}) == Catch::Approx(5.0));
    // pure constant
    CHECK(poly_parse("3.25").eval(EvalPoint{}) == Catch::Approx(3.25));
    // scientific-notation coefficient
    CHECK(poly_parse("1e-3*S").eval(EvalPoint{{kS, 2.0}}) == Catch::Approx(2e-3));
    // leading sign
    CHECK(poly_parse("-S^2").eval(EvalPoint{{kS, 3.0}}) == Catch::Approx(-9.0));
    // unparenthesised and negative exponents
    CHECK(poly_parse("S^2*Q^(-1)").eval(EvalPoint{{kS, 2.0}, {kQ, 4.0}}) == Catch::Approx(1.0));
    // decimal exponent becomes an exact rational over a power of ten
    const GenPoly dec = poly_parse("S^0.5");
    CHECK(dec.terms().begin()->first.at(kS) == Rational(1, 2));
    // whitespace is free
    CHECK(poly_parse("  2 * S ^ ( 3 / 2 )  ").eval(EvalPoint{{kS, 4.0}}) == Catch::Approx(16.0));
    // like terms collapse during parsing
    CHECK(poly_parse("S + S").term_count() == 1);
    CHECK(poly_parse("S - S").is_zero());
}

TEST_CASE("syntax errors carry positions") {
    CHECK_THROWS_AS(poly_parse(""), SyntaxError);
    CHECK_THROWS_AS(poly_parse("   "), SyntaxError);
    CHECK_THROWS_AS(poly_parse("2*"), SyntaxError);
    CHECK_THROWS_AS(poly_parse("S^"), SyntaxError);
    CHECK_THROWS_AS(poly_parse("S^(1/2"), SyntaxError);
    CHECK_THROWS_AS(poly_parse("S^(1/0)"), SyntaxError);
    CHECK_THROWS_AS(poly_parse("2 S"), SyntaxError);  // missing operator
    CHECK_THROWS_AS(poly_parse("S + + Q"), SyntaxError);
    CHECK_THROWS_AS(poly_parse("$"), SyntaxError);

    try {
        poly_parse("2*S + %");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.pos == 6);
        CHECK(std::string(e.what()).find("position 6") != std::string::npos);
    }
}

TEST_CASE("the allowed-variable set is enforced") {
    const std::set<std::string> allowed{"S", "Q"};
    CHECK_NOTHROW(poly_parse("S*Q", allowed));
    CHECK_THROWS_AS(poly_parse("S*x", allowed), UnknownVariable);
    try {
        poly_parse("S + volume", allowed);
        FAIL("expected UnknownVariable");
    } catch (const UnknownVariable& e) {
        CHECK(e.variable == "volume");
    }
    // without a set, any identifier is accepted
    CHECK_NOTHROW(poly_parse("S + volume"));
}

TEST_CASE("display emits the documented grammar") {
    CHECK(display(GenPoly::zero()) == "0");
    CHECK(display(GenPoly::constant(2.5)) == "2.5");
    CHECK(display(GenPoly::monomial(-1.0, kS, Rational(1, 2))) == "-1*S^(1/2)");
    // term order follows the canonical exponent-map order: the Q term first
    const GenPoly p = GenPoly::variable(kQ) - GenPoly::monomial(1.0, kS, Rational(2));
    CHECK(display(p) == "1*Q - 1*S^2");
    const GenPoly neg = GenPoly::monomial(1.0, kS, Rational(-3, 2));
    CHECK(display(neg) == "1*S^(-3/2)");
}

TEST_CASE("display/parse round-trips structurally") {
    const std::vector<Rational> pool = {Rational(-2),   Rational(-1, 2), Rational(1, 2),
                                        Rational(1),    Rational(3, 2),  Rational(2),
                                        Rational(7, 3), Rational(-5, 4), Rational(0)};
    Rng rng(606);
    for (int trial = 0; trial < 500; ++trial) {
        GenPoly p = GenPoly::zero();
        const int nt = 1 + rng.pick(5);
        for (int t = 0; t < nt; ++t) {
            ExpVec e;
            if (rng.pick(2)) e[kS] = pool[static_cast<std::size_t>(rng.pick(9))];
            if (rng.pick(2)) e[kQ] = pool[static_cast<std::size_t>(rng.pick(9))];
            if (rng.pick(2)) e[kL] = pool[static_cast<std::size_t>(rng.pick(9))];
            double c = rng.uniform(-10.0, 10.0);
            if (c == 0.0) c = 1.0;
            p = p + GenPoly::monomial(c, std::move(e));
        }
        const GenPoly back = poly_parse(display(p));
        // shortest round-trip coefficient formatting makes this exact
        CHECK(back == p);
    }
}
