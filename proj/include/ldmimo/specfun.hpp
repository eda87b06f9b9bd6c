#pragma once

// Closed-form special functions used by the energy and rate formulas.

#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace ldmimo {

/// (1/pi) * integral_0^1 sqrt(t(1-t)) log(t+x) / (t+y) dt, in closed form.
///
/// The first term carries a sqrt(x(1+y)) that is evaluated through its
/// analytic limit at x = 0; the y = 0 case drops the same term entirely.
inline double g_fun(double x, double y) {
    if (!(x >= 0.0) || !(y >= 0.0)) {
        throw DomainError("g_fun: arguments must be non-negative");
    }
    const double sx = std::sqrt(x);
    const double s1x = std::sqrt(1.0 + x);
    const double sy = std::sqrt(y);
    const double s1y = std::sqrt(1.0 + y);

    double cross = 0.0;
    if (y > 0.0) {
        // log[(sqrt(x(1+y)) + sqrt(y(1+x))) / (sqrt(1+y) + sqrt(y))]
        const double num = (x == 0.0) ? sy : sx * s1y + sy * s1x;
        cross = -2.0 * sy * s1y * std::log(num / (s1y + sy));
    }
    const double edge = (x == 0.0) ? -std::numbers::ln2 : std::log(0.5 * (s1x + sx));
    // (sqrt(1+x) - sqrt(x))^2 = 1 / (sqrt(1+x) + sqrt(x))^2, stable for large x
    const double diff = 1.0 / (s1x + sx);
    return cross + (1.0 + 2.0 * y) * edge - 0.5 * diff * diff;
}

/// Gaussian upper tail Q(x) = P(Z > x).
inline double q_fun(double x) {
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

/// ln Q(x) for x >= 0, finite far beyond where Q underflows.
///
/// Uses the Mills-ratio continued fraction Q(x) = phi(x) / (x + 1/(x + 2/(x + ...)))
/// above x = 8.
inline double q_fun_log(double x) {
    if (!(x >= 0.0)) {
        throw DomainError("q_fun_log: argument must be non-negative");
    }
    if (x <= 8.0) {
        return std::log(q_fun(x));
    }
    // Backward evaluation of the continued fraction; 60 levels is far past
    // convergence for x > 8.
    double tail = x;
    for (int n = 60; n >= 1; --n) {
        tail = x + n / tail;
    }
    const double log_phi = -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
    return log_phi - std::log(tail);
}

/// ln(1 - Q(x)) without cancellation, x >= 0.
inline double q_fun_log_complement(double x) {
    if (x <= 8.0) {
        return std::log1p(-q_fun(x));
    }
    return std::log1p(-std::exp(q_fun_log(x)));
}

}  // namespace ldmimo
