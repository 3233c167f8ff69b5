#include <cmath>

#include "doctest.h"
#include "perpint/improper.hpp"

using namespace perpint;

namespace {

AsymptoticExponent exact_power(double p) {
    AsymptoticExponent a;
    a.has_exponent = true;
    a.exponent = p;
    a.leading_coeff = 1.0;
    a.exact = true;
    return a;
}

}  // namespace

TEST_CASE("exponent rule at a finite boundary and at infinity") {
    CHECK(exponent_decide(exact_power(-0.5), false).convergent == Tri::Yes);
    CHECK(exponent_decide(exact_power(-1.0), false).convergent == Tri::No);
    CHECK(exponent_decide(exact_power(-1.5), false).convergent == Tri::No);
    CHECK(exponent_decide(exact_power(-0.5), true).convergent == Tri::No);
    CHECK(exponent_decide(exact_power(-1.0), true).convergent == Tri::No);
    CHECK(exponent_decide(exact_power(-1.5), true).convergent == Tri::Yes);

    AsymptoticExponent fitted = exact_power(-0.98);
    fitted.exact = false;
    CHECK(exponent_decide(fitted, false).convergent == Tri::Unknown);  // border band
    fitted.exponent = -0.5;
    const auto d = exponent_decide(fitted, false);
    CHECK(d.convergent == Tri::Yes);
    CHECK(d.method == DecisionMethod::NumericExtrapolation);
}

TEST_CASE("cutoff ladder decisions with value recovery") {
    SUBCASE("convergent power law at zero") {
        auto d = ladder_decide([](double y) { return 1.0 / std::sqrt(y); },
                               Boundary::zero(), 1.0);
        CHECK(d.convergent == Tri::Yes);
        CHECK(d.value == doctest::Approx(2.0).epsilon(1e-4));
    }
    SUBCASE("slowly convergent power law at zero") {
        auto d = ladder_decide([](double y) { return std::pow(y, -0.9); },
                               Boundary::zero(), 1.0);
        CHECK(d.convergent == Tri::Yes);
        CHECK(d.value == doctest::Approx(10.0).epsilon(1e-2));
    }
    SUBCASE("log divergence at zero") {
        auto d = ladder_decide([](double y) { return 1.0 / y; }, Boundary::zero(), 1.0);
        CHECK(d.convergent == Tri::No);
    }
    SUBCASE("strong divergence overflows the ladder") {
        auto d = ladder_decide([](double y) { return 1.0 / (y * y * y * y); },
                               Boundary::zero(), 1.0);
        CHECK(d.convergent == Tri::No);
    }
    SUBCASE("tails at infinity") {
        auto d = ladder_decide([](double y) { return 1.0 / (y * y); },
                               Boundary::infinity(), 1.0);
        CHECK(d.convergent == Tri::Yes);
        CHECK(d.value == doctest::Approx(1.0).epsilon(1e-4));
        d = ladder_decide([](double y) { return 1.0 / y; }, Boundary::infinity(), 1.0);
        CHECK(d.convergent == Tri::No);
    }
    SUBCASE("finite boundary approached from below") {
        auto d = ladder_decide([](double y) { return 1.0 / std::sqrt(1.0 - y); },
                               Boundary::finite_below(1.0), 0.5);
        CHECK(d.convergent == Tri::Yes);
        // int_{0.5}^{1} (1-y)^{-1/2} dy = 2 sqrt(1/2)
        CHECK(d.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
        d = ladder_decide([](double y) { return 1.0 / (1.0 - y); },
                          Boundary::finite_below(1.0), 0.5);
        CHECK(d.convergent == Tri::No);
    }
    SUBCASE("logarithmic border case is not guessed") {
        // 1/(y log^2 y) converges at 0 but only logarithmically slowly;
        // the honest answer here is Unknown, never a confident No.
        auto d = ladder_decide(
            [](double y) {
                const double l = std::log(y);
                return 1.0 / (y * l * l);
            },
            Boundary::zero(), 0.5);
        CHECK(d.convergent != Tri::No);
    }
}

TEST_CASE("combined decision prefers the exponent and falls back to the ladder") {
    auto g = [](double y) { return std::pow(y, -0.5); };
    auto d = decide_improper(exact_power(-0.5), g, Boundary::zero(), 1.0);
    CHECK(d.convergent == Tri::Yes);
    CHECK(d.method == DecisionMethod::SymbolicExponent);
    CHECK(d.value == doctest::Approx(2.0).epsilon(1e-4));

    AsymptoticExponent unknown;
    d = decide_improper(unknown, g, Boundary::zero(), 1.0);
    CHECK(d.convergent == Tri::Yes);
    CHECK(d.method == DecisionMethod::NumericExtrapolation);
}
