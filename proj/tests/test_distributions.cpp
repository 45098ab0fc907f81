#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fxlab/distributions.hpp"

using fxlab::dist::f_cdf;
using fxlab::dist::f_sf;
using fxlab::dist::regularized_incomplete_beta;

TEST_CASE("regularized incomplete beta closed forms") {
    // I_x(1,1) = x
    for (double x : {0.05, 0.3, 0.72, 0.99})
        REQUIRE_THAT(regularized_incomplete_beta(x, 1.0, 1.0),
                     Catch::Matchers::WithinAbs(x, 1e-12));
    // arcsine law: I_x(1/2,1/2) = (2/pi) asin(sqrt(x))
    for (double x : {0.1, 0.25, 0.5, 0.9})
        REQUIRE_THAT(regularized_incomplete_beta(x, 0.5, 0.5),
                     Catch::Matchers::WithinAbs(2.0 / M_PI * std::asin(std::sqrt(x)), 1e-12));
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    for (double x : {0.2, 0.6}) {
        for (double a : {0.7, 3.0}) {
            for (double b : {1.5, 8.0}) {
                REQUIRE_THAT(regularized_incomplete_beta(x, a, b),
                             Catch::Matchers::WithinAbs(
                                 1.0 - regularized_incomplete_beta(1.0 - x, b, a), 1e-12));
            }
        }
    }
}

TEST_CASE("F cdf matches the d1=2 closed form") {
    // For d1 = 2: P(F <= x) = 1 - (d2 / (2x + d2))^(d2/2).
    for (double d2 : {3.0, 11.0, 40.0, 155.0}) {
        for (double x : {0.1, 0.7, 2.0, 5.5, 20.0}) {
            const double exact = 1.0 - std::pow(d2 / (2.0 * x + d2), d2 / 2.0);
            REQUIRE_THAT(f_cdf(x, 2.0, d2), Catch::Matchers::WithinAbs(exact, 1e-12));
        }
    }
}

TEST_CASE("F cdf hits tabulated 95th/99th percentiles") {
    struct Anchor {
        double x, d1, d2, p;
    };
    // Frozen from standard F tables.
    const Anchor anchors[] = {
        {4.9646, 1, 10, 0.95},  {3.4928, 2, 20, 0.95}, {2.6802, 3, 120, 0.95},
        {2.9782, 10, 10, 0.95}, {3.6990, 5, 30, 0.99},
    };
    for (const auto& a : anchors)
        REQUIRE_THAT(f_cdf(a.x, a.d1, a.d2), Catch::Matchers::WithinAbs(a.p, 2e-3));
}

TEST_CASE("F cdf basic properties") {
    REQUIRE(f_cdf(0.0, 3.0, 7.0) == 0.0);
    REQUIRE(f_cdf(-1.0, 3.0, 7.0) == 0.0);
    REQUIRE(f_sf(0.0, 3.0, 7.0) == 1.0);
    double last = -1.0;
    for (double x = 0.0; x < 30.0; x += 0.25) {
        const double c = f_cdf(x, 4.0, 17.0);
        REQUIRE(c >= last);
        REQUIRE(c >= 0.0);
        REQUIRE(c <= 1.0);
        REQUIRE_THAT(c + f_sf(x, 4.0, 17.0), Catch::Matchers::WithinAbs(1.0, 1e-12));
        last = c;
    }
}
