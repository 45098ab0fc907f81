#pragma once

#include <cmath>
#include <limits>

namespace fxlab::dist {

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz's method).
inline double incbeta_cf(double x, double a, double b) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-15;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double result = d;
    for (int m = 1; m <= 300; ++m) {
        const double dm = static_cast<double>(m);
        // even step
        double num = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
        d = 1.0 + num * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        result *= d * c;
        // odd step
        num = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
        d = 1.0 + num * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double mult = d * c;
        result *= mult;
        if (std::fabs(mult - 1.0) < eps) break;
    }
    return result;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0) || std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::incbeta_cf(x, a, b) / a;
    }
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) *
                     detail::incbeta_cf(1.0 - x, b, a) / b;
}

/// CDF of the F distribution with (d1, d2) degrees of freedom.
inline double f_cdf(double x, double d1, double d2) {
    if (x <= 0.0) return 0.0;
    return regularized_incomplete_beta(d1 * x / (d1 * x + d2), 0.5 * d1, 0.5 * d2);
}

/// Upper tail P(F > x).
inline double f_sf(double x, double d1, double d2) {
    if (x <= 0.0) return 1.0;
    return regularized_incomplete_beta(d2 / (d1 * x + d2), 0.5 * d2, 0.5 * d1);
}

/// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730951); }

}  // namespace fxlab::dist
