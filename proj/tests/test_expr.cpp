#include <cmath>
#include <cstring>

#include "doctest.h"
#include "perpint/expr.hpp"
#include "perpint/rng.hpp"

using namespace perpint;

TEST_CASE("parse and evaluate basic expressions") {
    CHECK(CoefficientExpr::parse("1+2*3").eval(0.0) == doctest::Approx(7.0));
    CHECK(CoefficientExpr::parse("(1+2)*3").eval(0.0) == doctest::Approx(9.0));
    CHECK(CoefficientExpr::parse("y^2 - 2*y + 1").eval(3.0) == doctest::Approx(4.0));
    CHECK(CoefficientExpr::parse("sqrt(y*(1-y))").eval(0.5) == doctest::Approx(0.5));
    CHECK(CoefficientExpr::parse("exp(log(y))").eval(2.5) == doctest::Approx(2.5));
    CHECK(CoefficientExpr::parse("min(1, max(0, 2-2*y))").eval(0.75) == doctest::Approx(0.5));
    CHECK(CoefficientExpr::parse("-y^2").eval(2.0) == doctest::Approx(-4.0));
    CHECK(CoefficientExpr::parse("1/y^0.5").eval(4.0) == doctest::Approx(0.5));
    CHECK(CoefficientExpr::parse("abs(1-y)").eval(3.0) == doctest::Approx(2.0));
}

TEST_CASE("parse errors carry position and expectation") {
    CHECK_THROWS_AS(CoefficientExpr::parse("1+"), ParseError);
    CHECK_THROWS_AS(CoefficientExpr::parse("(1+2"), ParseError);
    CHECK_THROWS_AS(CoefficientExpr::parse("foo(y)"), ParseError);
    CHECK_THROWS_AS(CoefficientExpr::parse("min(y)"), ParseError);
    CHECK_THROWS_AS(CoefficientExpr::parse("y^y"), ParseError);  // non-constant exponent
    CHECK_THROWS_AS(CoefficientExpr::parse(""), ParseError);
    try {
        CoefficientExpr::parse("1 + @");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset == 4);
    }
}

TEST_CASE("domain errors") {
    const auto e = CoefficientExpr::parse("log(y)");
    CHECK_THROWS_AS(e.eval(-1.0), EvalDomainError);
    double out;
    CHECK_FALSE(e.try_eval(-1.0, out));
    CHECK_FALSE(CoefficientExpr::parse("1/y").try_eval(0.0, out));
    CHECK_FALSE(CoefficientExpr::parse("sqrt(y)").try_eval(-2.0, out));
    CHECK(CoefficientExpr::parse("sqrt(y)").try_eval(2.0, out));
}

TEST_CASE("pretty-print round trip is bitwise on 1000 random points") {
    const char* sources[] = {
        "sqrt(y*(1-y))",
        "y^2 - 2*y + 1e-3",
        "exp(-0.5*y^2)/(1+y)",
        "min(1, max(0, 2-2*y)) + abs(y-0.25)",
        "1/y^1.5 + log(1+y)",
        "-(y+1)*(y-1)/(y^2+1)",
    };
    RngStream rng(0xD1FF0510ull, 1);
    for (const char* src : sources) {
        const auto e1 = CoefficientExpr::parse(src);
        const auto e2 = CoefficientExpr::parse(e1.pretty_print());
        CHECK(e1.structurally_equal(e2));
        for (int i = 0; i < 1000; ++i) {
            const double y = rng.uniform() * 4.0;
            double v1, v2;
            const bool ok1 = e1.try_eval(y, v1);
            const bool ok2 = e2.try_eval(y, v2);
            REQUIRE(ok1 == ok2);
            if (ok1) REQUIRE(std::memcmp(&v1, &v2, sizeof v1) == 0);
        }
    }
}

TEST_CASE("symbolic exponents at the boundaries") {
    auto exp_at = [](const char* src, const Boundary& b) {
        return exponent_at(CoefficientExpr::parse(src), b);
    };

    SUBCASE("power laws at zero") {
        auto a = exp_at("1/y^2", Boundary::zero());
        REQUIRE(a.has_exponent);
        CHECK(a.exponent == doctest::Approx(-2.0));
        CHECK(a.exact);
        a = exp_at("y*(1-0.1*y)", Boundary::zero());
        REQUIRE(a.has_exponent);
        CHECK(a.exponent == doctest::Approx(1.0));
        CHECK(a.leading_coeff == doctest::Approx(1.0));
    }
    SUBCASE("finite boundary from below") {
        auto a = exp_at("sqrt(y*(1-y))", Boundary::finite_below(1.0));
        REQUIRE(a.has_exponent);
        CHECK(a.exponent == doctest::Approx(0.5));
        a = exp_at("1/(1-y)", Boundary::finite_below(1.0));
        REQUIRE(a.has_exponent);
        CHECK(a.exponent == doctest::Approx(-1.0));
    }
    SUBCASE("infinity") {
        auto a = exp_at("1/(y^2+1)", Boundary::infinity());
        REQUIRE(a.has_exponent);
        CHECK(a.exponent == doctest::Approx(-2.0));
        a = exp_at("y*(1-0.1*y)", Boundary::infinity());
        REQUIRE(a.has_exponent);
        CHECK(a.exponent == doctest::Approx(2.0));
        CHECK(a.leading_coeff == doctest::Approx(-0.1));
    }
    SUBCASE("beyond all powers") {
        CHECK(exp_at("exp(1/y)", Boundary::zero()).super_growth);
        CHECK(exp_at("exp(-1/y)", Boundary::zero()).super_decay);
        CHECK(exp_at("exp(-0.5*y^2)", Boundary::infinity()).super_decay);
    }
    SUBCASE("exact cancellation") {
        CHECK(exp_at("y*(2-y) + y^2 - 2*y", Boundary::zero()).identically_zero);
    }
}

TEST_CASE("fitted exponent fallback agrees with closed forms") {
    const auto e = CoefficientExpr::parse("y^0.7*(2+y)");
    const auto a = fit_exponent(e, Boundary::zero());
    REQUIRE(a.has_exponent);
    CHECK_FALSE(a.exact);
    CHECK(a.exponent == doctest::Approx(0.7).epsilon(1e-3));
    CHECK(a.leading_coeff == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("combinators compose trees") {
    const auto f = CoefficientExpr::parse("1/y");
    const auto g = expr_add(f, expr_pow(expr_var(), -1.5));
    CHECK(g.eval(2.0) == doctest::Approx(0.5 + std::pow(2.0, -1.5)));
    const auto a = exponent_at(g, Boundary::zero());
    REQUIRE(a.has_exponent);
    CHECK(a.exponent == doctest::Approx(-1.5));
}
