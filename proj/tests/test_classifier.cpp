#include <cmath>
#include <string>

#include "doctest.h"
#include "perpint/classifier.hpp"

using namespace perpint;

namespace {

DiffusionSpec make_spec(const std::string& sigma, const std::string& drift,
                        double lo = 0.0, double hi = INFINITY, double ref = 1.0) {
    DiffusionSpec s;
    s.sigma = CoefficientExpr::parse(sigma);
    s.drift = CoefficientExpr::parse(drift);
    s.lo = lo;
    s.hi = hi;
    s.ref = ref;
    return s;
}

Outcome classify_power(double w, double alpha) {
    // dN = sqrt(N) dB + w dt against f = 1/y^alpha
    const auto f = expr_pow(expr_var(), -alpha);
    return classify_perpetual_zero(make_spec("sqrt(y)", std::to_string(w)), f).outcome;
}

}  // namespace

TEST_CASE("branching with immigration against power integrands") {
    CHECK(classify_power(0.25, 1.0) == Outcome::InfiniteAS);
    CHECK(classify_power(0.25, 0.5) == Outcome::FiniteAS);
    CHECK(classify_power(0.1, 2.0) == Outcome::InfiniteAS);
    CHECK(classify_power(0.4, 0.9) == Outcome::FiniteAS);
}

TEST_CASE("logistic diffusion") {
    const auto spec = make_spec("sqrt(y)", "y*(1-0.1*y)");
    CHECK(classify_perpetual_zero(spec, CoefficientExpr::parse("1/y")).outcome ==
          Outcome::InfiniteAS);
    CHECK(classify_perpetual_zero(spec, CoefficientExpr::parse("1/sqrt(y)")).outcome ==
          Outcome::FiniteAS);
}

TEST_CASE("natural-scale Brownian motion with f = 1 gives a finite hitting time") {
    const auto v = classify_perpetual_zero(make_spec("1", "0"),
                                           CoefficientExpr::parse("1"));
    CHECK(v.outcome == Outcome::FiniteAS);
}

TEST_CASE("non-absorbed specs are rejected as inapplicable") {
    CHECK_THROWS_AS(classify_perpetual_zero(make_spec("sqrt(y)", "0.75"),
                                            CoefficientExpr::parse("1")),
                    SpecError);
}

TEST_CASE("adding a divergence-forcing term flips FiniteAS to InfiniteAS") {
    const auto spec = make_spec("sqrt(y)", "0.25");
    for (const char* src : {"1/sqrt(y)", "1", "y"}) {
        const auto f = CoefficientExpr::parse(src);
        REQUIRE(classify_perpetual_zero(spec, f).outcome == Outcome::FiniteAS);
        const auto flipped = expr_add(f, expr_pow(expr_var(), -1.5));
        CHECK(classify_perpetual_zero(spec, flipped).outcome == Outcome::InfiniteAS);
    }
}

TEST_CASE("numeric-extrapolation route agrees with the closed-form alpha rule") {
    // the decision integrand f*s/(s'*sigma^2) evaluated through the scale
    // tables, bypassing the symbolic exponent entirely
    for (double w : {0.1, 0.25, 0.4}) {
        const auto ss = ScaleSpeed::build(make_spec("sqrt(y)", std::to_string(w)));
        for (double alpha : {0.5, 0.9, 1.0, 1.1, 2.0}) {
            auto g = [&ss, alpha](double y) {
                return std::pow(y, -alpha) * ss.s(y) / (ss.s_prime(y) * y);
            };
            const auto d = ladder_decide(g, Boundary::zero(), 1.0);
            const Tri expect = alpha >= 1.0 ? Tri::No : Tri::Yes;
            INFO("w=", w, " alpha=", alpha);
            CHECK(d.convergent == expect);
        }
    }
}

TEST_CASE("two-sided classification on the Wright-Fisher interval") {
    const auto wf = make_spec("sqrt(y*(1-y))", "0", 0, 1, 0.5);
    const auto f1 = CoefficientExpr::parse("1/(1-y)");
    CHECK(classify_perpetual_two_sided(wf, f1, Side::Upper).outcome ==
          Outcome::InfiniteAS);
    CHECK(classify_perpetual_two_sided(wf, CoefficientExpr::parse("1"),
                                       Side::Lower).outcome == Outcome::FiniteAS);
    CHECK(classify_perpetual_two_sided(wf, CoefficientExpr::parse("1"),
                                       Side::Upper).outcome == Outcome::FiniteAS);

    // selection r: drift r*y*(1-y), same divergence at the fixation boundary
    const auto wfs = make_spec("sqrt(y*(1-y))", "0.5*y*(1-y)", 0, 1, 0.5);
    CHECK(classify_perpetual_two_sided(wfs, f1, Side::Upper).outcome ==
          Outcome::InfiniteAS);
}

TEST_CASE("moment bounds") {
    const auto bm = make_spec("1", "0");
    const auto bump = CoefficientExpr::parse("min(1, max(0, 2-2*y))");
    // int_0^inf s f m = 2 int y f dy = 7/12
    const auto b1 = moment_bound(bm, bump, 1);
    CHECK(b1.integral == doctest::Approx(7.0 / 12.0).epsilon(1e-3));
    CHECK(b1.bound == doctest::Approx(b1.integral));
    const auto b2 = moment_bound(bm, bump, 2);
    const auto b3 = moment_bound(bm, bump, 3);
    CHECK(b3.bound / b2.bound == doctest::Approx(3.0 * b1.integral).epsilon(1e-6));
    // f = 1 makes int s f m diverge at infinity
    CHECK(moment_bound(bm, CoefficientExpr::parse("1"), 1).bound == INFINITY);
}

TEST_CASE("fixation before extinction, natural scale") {
    const auto f = CoefficientExpr::parse("y");
    CHECK(classify_fixation_natural_scale(CoefficientExpr::parse("sqrt(y)"), f)
              .outcome == Outcome::InfiniteAS);  // fixation a.s. first
    for (double eps : {0.1, 0.25, 0.4}) {
        const auto sigma = expr_pow(expr_var(), (1.0 - eps) / 2.0);
        CHECK(classify_fixation_natural_scale(sigma, f).outcome == Outcome::FiniteAS);
    }
}

TEST_CASE("fixation criterion, general drift, reduces to int 1/sigma^2") {
    // logistic population size: the s/(s' sigma^2 f) integrand behaves like
    // 1/sigma^2 near 0
    const auto spec = make_spec("sqrt(y)", "y*(1-0.1*y)");
    const auto v = classify_fixation_general(spec, CoefficientExpr::parse("y"));
    CHECK(v.outcome == Outcome::InfiniteAS);  // int_0+ dy/y = inf

    const auto spec2 = make_spec("y^0.3", "y*(1-0.1*y)");  // eps = 0.4
    CHECK(classify_fixation_general(spec2, CoefficientExpr::parse("y")).outcome ==
          Outcome::FiniteAS);  // int_0+ y^{-0.6} dy < inf
}

TEST_CASE("girsanov reduction") {
    const GirsanovAssertions ok{true, true};
    const auto spec = make_spec("sqrt(y)", "0.25");
    const auto f = CoefficientExpr::parse("1/sqrt(y)");

    SUBCASE("q = 0 matches the homogeneous classifier") {
        const auto v = girsanov_reduce(spec, CoefficientExpr::parse("0"), ok, f);
        CHECK(v.outcome == classify_perpetual_zero(spec, f).outcome);
    }
    SUBCASE("Lotka-Volterra-style perturbation passes the bound check") {
        // q = (r2-r1) N (1-X) <= 0.2 y as a state function; |q/sigma| ~ sqrt(y)
        const auto v = girsanov_reduce(spec, CoefficientExpr::parse("0.2*y"), ok, f);
        CHECK(v.outcome == Outcome::FiniteAS);
    }
    SUBCASE("unverifiable Novikov-type condition is an error") {
        CHECK_THROWS_AS(girsanov_reduce(make_spec("y", "0.25*y"),
                                        CoefficientExpr::parse("1"), ok, f),
                        SpecError);
    }
    SUBCASE("missing caller assertions are an error") {
        CHECK_THROWS_AS(girsanov_reduce(spec, CoefficientExpr::parse("0"),
                                        GirsanovAssertions{false, true}, f),
                        SpecError);
    }
}
