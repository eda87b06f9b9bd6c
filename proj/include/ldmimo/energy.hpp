#pragma once

// Minimum Coulomb-gas energies with and without the rate constraint, and the
// large-deviations exponent E1(r) - E0 with its r-derivatives.

#include <algorithm>
#include <array>
#include <cmath>

#include "baselines.hpp"
#include "errors.hpp"
#include "specfun.hpp"
#include "spectrum.hpp"

namespace ldmimo {

/// Exponent data at one rate. E1'(r) equals the rate tilt k.
struct ExponentPoint {
    double r = 0.0;
    double exponent = 0.0;   // E1(r) - E0
    double k = 0.0;          // E1'(r)
    double e1_second = 0.0;  // E1''(r) = dk/dr, central difference
};

inline constexpr double kUnitE0 = 1.5;

/// Unconstrained minimum energy.
inline double e0(double beta) {
    if (!(beta >= 1.0 - kUnitRatioTolerance)) throw DomainError("e0: beta must be >= 1");
    if (is_unit_ratio(beta)) return kUnitE0;
    const auto mp = unconstrained_spectrum(beta);
    const double a = mp.a;
    const double delta = mp.b - mp.a;
    const double y = a / delta;
    return delta * delta / 32.0 + 0.5 * a - std::log(delta) -
           0.5 * (beta - 1.0) * std::log(a * delta) -
           0.5 * delta * (g_fun(0.0, y) + 0.5 * (beta - 1.0) * g_fun(y, y));
}

namespace detail {

// E1 - E0 on the beta = 1 interior branch.
inline double unit_interior_excess(double rho, double k, double r) {
    const double klogk = (k > 0.0) ? k * std::log(k) : 0.0;
    return 0.5 * (k - 1.0) * (r - std::log(rho)) + k - 0.5 - 1.0 / rho - 0.5 * klogk;
}

// E1 - E0 on the beta = 1 hard-edge branch.
inline double hard_edge_excess(double rho, double b, double k, double r) {
    const double s = std::sqrt(1.0 + rho * b);
    const double sm1 = rho * b / (s + 1.0);
    return 0.5 * k * (r - 0.25 * b) - std::log(0.25 * b) - k * std::log1p(0.5 * sm1) +
           (b - 4.0) * (4.0 / rho + 3.0 * b + 12.0) / 32.0;
}

inline double interior_e1(const ConstrainedSpectrum& sp) {
    const double a = sp.a, b = sp.b, k = sp.k, rho = sp.rho, beta = sp.beta;
    const double delta = b - a;
    const double sa = std::sqrt(1.0 + rho * a);
    const double sb = std::sqrt(1.0 + rho * b);
    const double s = sa * sb;
    const double tilt = k * rho / s;
    const double y_shift = (1.0 + rho * a) / (delta * rho);
    const double y_edge = a / delta;
    const double x_edge = a / delta;
    const double c = 0.5 * (beta - 1.0);
    double v = delta * delta / 32.0 + 0.5 * a - std::log(delta) - c * std::log(a * delta);
    v += 0.5 * k * (sp.r - std::log1p(rho * a) - (sb - sa) * (sb - sa) / (4.0 * rho * s));
    v -= 0.5 * delta * tilt * (g_fun(0.0, y_shift) + c * g_fun(x_edge, y_shift));
    v -= 0.5 * delta * (1.0 - tilt) * (g_fun(0.0, y_edge) + c * g_fun(x_edge, y_edge));
    return v;
}

}  // namespace detail

/// E1(r) - E0 for a solved spectrum.
inline double excess_energy(const ConstrainedSpectrum& spec) {
    if (spec.regime == Regime::HardEdge) {
        return detail::hard_edge_excess(spec.rho, spec.b, spec.k, spec.r);
    }
    if (is_unit_ratio(spec.beta)) {
        return detail::unit_interior_excess(spec.rho, spec.k, spec.r);
    }
    return detail::interior_e1(spec) - e0(spec.beta);
}

/// Constrained minimum energy E1 for a solved spectrum.
inline double e1(const ConstrainedSpectrum& spec) {
    if (is_unit_ratio(spec.beta)) return kUnitE0 + excess_energy(spec);
    return detail::interior_e1(spec);
}

/// Central-difference step used for E1''(r).
inline double curvature_step(double r) {
    return std::min(std::max(1e-5, 1e-4 * r), 0.5 * r);
}

/// dk/dr at r by central difference of re-solved tilts.
inline double tilt_slope(const ChannelEnsemble& ens, double r, double h) {
    const double kp = solve_constrained(ens, r + h).k;
    const double km = solve_constrained(ens, r - h).k;
    return (kp - km) / (2.0 * h);
}

inline ExponentPoint exponent(const ChannelEnsemble& ens, double r) {
    const auto spec = solve_constrained(ens, r);
    ExponentPoint p;
    p.r = r;
    p.exponent = excess_energy(spec);
    p.k = spec.k;
    p.e1_second = tilt_slope(ens, r, curvature_step(r));
    return p;
}

/// Third derivative of E1 at the ergodic rate (five-point stencil of E1'').
///
/// For beta = 1 the stencil is kept below r_c: the third derivative jumps
/// there and r_c - r_erg shrinks like 1/sqrt(rho).
inline double s_erg(const ChannelEnsemble& ens) {
    const double r0 = ergodic_stats(ens).r_erg;
    double h = 1e-3 * std::max(1.0, r0);
    if (is_unit_ratio(ens.beta)) {
        h = std::min(h, 0.25 * (critical_rate(ens.rho) - r0));
    }
    const std::array<double, 4> offsets = {-2.0, -1.0, 1.0, 2.0};
    std::array<double, 4> d{};
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        const double r = r0 + offsets[i] * h;
        d[i] = tilt_slope(ens, r, curvature_step(r));
    }
    return (d[0] - 8.0 * d[1] + 8.0 * d[2] - d[3]) / (12.0 * h);
}

}  // namespace ldmimo
