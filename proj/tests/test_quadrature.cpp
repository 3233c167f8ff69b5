#include <cmath>

#include "doctest.h"
#include "perpint/quadrature.hpp"

using namespace perpint;

TEST_CASE("polynomial and smooth integrals") {
    CHECK(integrate([](double y) { return y * y; }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(integrate([](double y) { return std::exp(-0.5 * y * y); }, -10.0, 10.0) ==
          doctest::Approx(std::sqrt(2.0 * M_PI)).epsilon(1e-10));
    CHECK(integrate([](double y) { return std::sin(y); }, 0.0, M_PI) ==
          doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("log substitution handles power-law integrands hugging a boundary") {
    // int_0^1 y^{-1/2} dy = 2
    CHECK(integrate_log([](double y) { return 1.0 / std::sqrt(y); }, 1e-300, 1.0) ==
          doctest::Approx(2.0).epsilon(1e-8));
    // int over (2+1e-12, 3) of (y-2)^{-0.9} dy = 10 (1 - 1e-1.2), shifted to 2
    CHECK(integrate_log([](double y) { return std::pow(y - 2.0, -0.9); }, 2.0 + 1e-12,
                        3.0, 2.0) ==
          doctest::Approx(10.0 * (1.0 - std::pow(1e-12, 0.1))).epsilon(1e-6));
}

TEST_CASE("failures are reported with the offending subinterval") {
    CHECK_THROWS_AS(integrate([](double y) { return 1.0 / y; }, 0.0, 1.0),
                    QuadratureError);
    try {
        integrate([](double y) { return y < 0.125 ? 1.0 / (y * y) : 1.0; }, 0.0, 1.0,
                  1e-9, 60);
        FAIL("expected QuadratureError");
    } catch (const QuadratureError& e) {
        CHECK(e.lo >= 0.0);
        CHECK(e.hi <= 0.2);
    }
}
