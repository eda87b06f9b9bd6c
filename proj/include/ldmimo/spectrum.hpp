#pragma once

// Rate-constrained equilibrium eigenvalue densities ("generalized
// Marchenko-Pastur" laws) of H^dagger H and the quantities derived from them.
//
// Rates are in nats per transmit antenna. A spectrum is parametrized by its
// support [a, b] and the rate tilt k; k = 0 is the unconstrained MP law.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "errors.hpp"
#include "quadrature.hpp"
#include "roots.hpp"
#include "specfun.hpp"

namespace ldmimo {

/// Antenna ratio beta = M/N >= 1 and linear SNR rho.
struct ChannelEnsemble {
    double beta = 1.0;
    double rho = 1.0;
};

/// A channel after orientation so that beta >= 1.
struct NormalizedChannel {
    ChannelEnsemble ensemble;
    int n = 1;  // smaller dimension (plays the role of transmit antennas)
    int m = 1;  // larger dimension
};

enum class Regime {
    Interior,  // a > 0 (or a = 0 exactly at the beta = 1 transition), p(a) = p(b) = 0
    HardEdge,  // beta = 1, a = 0, x^(-1/2) divergence at the origin
};

struct ConstrainedSpectrum {
    Regime regime = Regime::Interior;
    double a = 0.0;
    double b = 0.0;
    double k = 0.0;
    double beta = 1.0;
    double rho = 1.0;
    double r = 0.0;
};

/// Support of the plain Marchenko-Pastur law.
struct UnconstrainedSpectrum {
    double a = 0.0;
    double b = 0.0;
};

inline constexpr double kUnitRatioTolerance = 1e-9;
inline constexpr double kRootTolerance = 1e-12;
inline constexpr int kMaxBisections = 200;
// Largest relative round-off floor accepted for a solved rate.
inline constexpr double kIllConditioned = 1e-6;

inline bool is_unit_ratio(double beta) {
    return std::fabs(beta - 1.0) <= kUnitRatioTolerance;
}

inline void validate(const ChannelEnsemble& ens) {
    if (!(ens.beta >= 1.0 - kUnitRatioTolerance) || !std::isfinite(ens.beta)) {
        throw DomainError("ChannelEnsemble: beta must be >= 1 (normalize first)");
    }
    if (!(ens.rho > 0.0) || !std::isfinite(ens.rho)) {
        throw DomainError("ChannelEnsemble: rho must be positive");
    }
}

/// Orients an (n_tx, n_rx) channel so that beta >= 1.
///
/// With fewer receive than transmit antennas the roles swap and the SNR is
/// rescaled to rho * n_tx / n_rx, which leaves log det(I + rho H^dagger H)
/// unchanged in distribution.
inline NormalizedChannel normalize_ensemble(int n_tx, int n_rx, double rho) {
    if (n_tx < 1 || n_rx < 1) {
        throw DomainError("normalize_ensemble: antenna counts must be >= 1");
    }
    if (!(rho > 0.0)) {
        throw DomainError("normalize_ensemble: rho must be positive");
    }
    if (n_rx >= n_tx) {
        return {{static_cast<double>(n_rx) / n_tx, rho}, n_tx, n_rx};
    }
    const double beta = static_cast<double>(n_tx) / n_rx;
    return {{beta, rho * beta}, n_rx, n_tx};
}

inline UnconstrainedSpectrum unconstrained_spectrum(double beta) {
    const double s = std::sqrt(beta);
    return {(s - 1.0) * (s - 1.0), (s + 1.0) * (s + 1.0)};
}

/// Tilt at which the beta = 1 interior solution touches the origin.
inline double critical_k(double rho) {
    if (!(rho > 0.0)) throw DomainError("critical_k: rho must be positive");
    return 1.0 / rho + 2.0 / std::sqrt(rho);
}

/// Rate separating the beta = 1 hard-edge and interior branches.
inline double critical_rate(double rho) {
    if (!(rho > 0.0)) throw DomainError("critical_rate: rho must be positive");
    const double sr = std::sqrt(rho);
    return (1.0 + 2.0 * sr) / rho * std::log1p(rho / (1.0 + 2.0 * sr)) +
           2.0 * std::log1p(sr) - 1.0;
}

namespace detail {

// Lower edge a(b, k) solving k rho / sqrt((1+rho a)(1+rho b)) + (beta-1)/sqrt(ab) = 1.
// The root in (0, b) is unique when it exists; none exists below a threshold b.
inline std::optional<double> lower_edge(double b, double k, double beta, double rho) {
    const double c = beta - 1.0;
    const double sb = std::sqrt(1.0 + rho * b);
    auto h = [&](double a) {
        return k * rho / (std::sqrt(1.0 + rho * a) * sb) + c / std::sqrt(a * b) - 1.0;
    };
    if (!(h(b) < 0.0)) return std::nullopt;
    double lo = 1e-3 * b;
    while (h(lo) <= 0.0) {
        lo *= 1e-3;
        if (lo < 1e-300) return std::nullopt;
    }
    return bisect(h, lo, b, kMaxBisections).root;
}

// Normalization integral of the beta > 1 interior density, minus one.
inline double normalization_residual(double a, double b, double k, double beta, double rho) {
    const double s = std::sqrt((1.0 + a * rho) * (1.0 + b * rho));
    return 0.25 * (a + b - 2.0 * k - 2.0 * (beta - 1.0)) + 0.5 * k / s - 1.0;
}

// Closed-form rate of a beta > 1 interior spectrum.
inline double interior_rate(double a, double b, double k, double rho) {
    const double delta = b - a;
    const double s = std::sqrt((1.0 + rho * a) * (1.0 + rho * b));
    const double tilt = k * rho / s;
    const double x = (1.0 + rho * a) / (delta * rho);
    return std::log(delta * rho) + 0.5 * delta * tilt * g_fun(x, x) +
           0.5 * delta * (1.0 - tilt) * g_fun(x, a / delta);
}

// Magnitude of the largest term summed in interior_rate.
inline double interior_rate_scale(const ConstrainedSpectrum& sp) {
    const double delta = sp.b - sp.a;
    const double s = std::sqrt(1.0 + sp.rho * sp.a) * std::sqrt(1.0 + sp.rho * sp.b);
    const double tilt = std::fabs(sp.k) * sp.rho / s;
    return std::fabs(std::log(delta * sp.rho)) + delta * (1.0 + tilt);
}

// Interior (a, b) for beta > 1 at fixed tilt: middle level of the nested solve.
inline ConstrainedSpectrum interior_at_tilt(const ChannelEnsemble& ens, double k) {
    const double beta = ens.beta;
    const double rho = ens.rho;
    auto g = [&](double b) {
        const auto a = lower_edge(b, k, beta, rho);
        if (!a) return -1.0;
        return normalization_residual(*a, b, k, beta, rho);
    };
    const auto mp = unconstrained_spectrum(beta);
    double hi = mp.b;
    int guard = 0;
    while (g(hi) < 0.0) {
        hi *= 2.0;
        if (++guard > 2000) throw ConvergenceError("interior_at_tilt: no upper bracket for b", g(hi));
    }
    double lo = hi;
    while (g(lo) >= 0.0) {
        lo *= 0.5;
        if (++guard > 4000) throw ConvergenceError("interior_at_tilt: no lower bracket for b", g(lo));
    }
    const auto res = bisect(g, lo, hi, kMaxBisections);
    // the residual sums terms of size |k| and b, so round-off scales with them
    const double scale = std::max({1.0, std::fabs(k), res.root});
    if (std::fabs(res.residual) > kRootTolerance * scale) {
        throw ConvergenceError("interior_at_tilt: normalization not met", res.residual);
    }
    const double b = res.root;
    const auto a = lower_edge(b, k, beta, rho);
    if (!a) throw ConvergenceError("interior_at_tilt: lower edge vanished at solution", 1.0);
    ConstrainedSpectrum spec{Regime::Interior, *a, b, k, beta, rho, 0.0};
    spec.r = interior_rate(spec.a, spec.b, k, rho);
    return spec;
}

// beta = 1, k >= k_c: support [(sqrt(k+1) -+ 1)^2 - 1/rho] in closed form.
inline ConstrainedSpectrum unit_interior_at_tilt(double rho, double k) {
    const double root = std::sqrt(k + 1.0);
    const double lower = k / (root + 1.0);  // sqrt(k+1) - 1 without cancellation
    const double a = std::max(0.0, lower * lower - 1.0 / rho);
    const double b = (root + 1.0) * (root + 1.0) - 1.0 / rho;
    const double klogk = (k > 0.0) ? k * std::log(k) : 0.0;
    const double r = std::log(rho) + (k + 1.0) * std::log1p(k) - klogk - 1.0;
    return {Regime::Interior, a, b, k, 1.0, rho, r};
}

// Tilt as a function of the hard-edge upper support end b.
inline double hard_edge_tilt_of(double b, double rho) {
    const double s = std::sqrt(1.0 + rho * b);
    // 1 - 1/s = rho b / (s (s + 1))
    return (0.5 * b - 2.0) * s * (s + 1.0) / (rho * b);
}

inline double hard_edge_rate(double b, double k, double rho) {
    const double s = std::sqrt(1.0 + rho * b);
    const double sm1 = rho * b / (s + 1.0);
    return 2.0 * (k + 1.0) * std::log1p(0.5 * sm1) - sm1 * sm1 / (4.0 * rho) -
           0.5 * k * std::log1p(rho * b);
}

// beta = 1, k <= k_c: a = 0 and b(k) from the normalization condition.
inline ConstrainedSpectrum hard_edge_at_tilt(double rho, double k) {
    const double b_crit = 4.0 + 4.0 / std::sqrt(rho);
    auto f = [&](double b) { return hard_edge_tilt_of(b, rho) - k; };
    double b;
    if (f(b_crit) <= 0.0) {
        b = b_crit;
    } else {
        double lo = std::min(1.0, b_crit);
        int guard = 0;
        while (f(lo) >= 0.0) {
            lo *= 0.5;
            if (++guard > 2000) throw ConvergenceError("hard_edge_at_tilt: no lower bracket", f(lo));
        }
        b = bisect(f, lo, b_crit, kMaxBisections).root;
    }
    return {Regime::HardEdge, 0.0, b, k, 1.0, rho, hard_edge_rate(b, k, rho)};
}

// Rate of the spectrum at a given tilt, used by the outer solve.
inline double rate_at_tilt(const ChannelEnsemble& ens, double k);

}  // namespace detail

/// Spectrum for a prescribed tilt k (the inverse map of solve_constrained).
inline ConstrainedSpectrum spectrum_at_tilt(const ChannelEnsemble& ens, double k) {
    validate(ens);
    if (is_unit_ratio(ens.beta)) {
        if (k >= critical_k(ens.rho)) return detail::unit_interior_at_tilt(ens.rho, k);
        return detail::hard_edge_at_tilt(ens.rho, k);
    }
    return detail::interior_at_tilt(ens, k);
}

inline double detail::rate_at_tilt(const ChannelEnsemble& ens, double k) {
    return spectrum_at_tilt(ens, k).r;
}

/// Closed-form rate integral of p(x) log(1 + rho x) for the spectrum's regime.
inline double rate_of(const ConstrainedSpectrum& spec) {
    if (spec.regime == Regime::HardEdge) {
        return detail::hard_edge_rate(spec.b, spec.k, spec.rho);
    }
    if (is_unit_ratio(spec.beta)) {
        const double k = spec.k;
        const double klogk = (k > 0.0) ? k * std::log(k) : 0.0;
        return std::log(spec.rho) + (k + 1.0) * std::log1p(k) - klogk - 1.0;
    }
    return detail::interior_rate(spec.a, spec.b, spec.k, spec.rho);
}

/// The unique constrained spectrum with rate r.
///
/// The tilt is found by bisection; the bracket starts from the large-|k|
/// asymptotics r ~ beta/|k| (k -> -inf) and r ~ log(k rho) (k -> +inf) and is
/// widened geometrically until the rate residual changes sign.
inline ConstrainedSpectrum solve_constrained(const ChannelEnsemble& ens, double r) {
    validate(ens);
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw DomainError("solve_constrained: rate must be positive");
    }
    ChannelEnsemble e = ens;
    if (is_unit_ratio(e.beta)) e.beta = 1.0;

    auto residual = [&](double k) { return detail::rate_at_tilt(e, k) - r; };

    double lo, hi;
    const double at_zero = residual(0.0);
    if (at_zero == 0.0) {
        lo = hi = 0.0;
    } else if (at_zero > 0.0) {
        hi = 0.0;
        lo = -std::max(1.0, 0.5 * e.beta / r);
        int guard = 0;
        while (residual(lo) > 0.0) {
            hi = lo;
            lo *= 2.0;
            if (++guard > 200) throw ConvergenceError("solve_constrained: no lower tilt bracket", residual(lo));
        }
    } else {
        lo = 0.0;
        hi = std::max(1.0, 2.0 * std::exp(std::min(r, 700.0)) / e.rho);
        int guard = 0;
        while (residual(hi) < 0.0) {
            lo = hi;
            hi *= 2.0;
            if (++guard > 200) throw ConvergenceError("solve_constrained: no upper tilt bracket", residual(hi));
        }
    }
    const double k = (lo == hi) ? lo : detail::bisect(residual, lo, hi, kMaxBisections).root;
    ConstrainedSpectrum spec = spectrum_at_tilt(e, k);
    const double err = spec.r - r;
    // As r -> 0 the tilt grows like -beta/r and the closed-form rate carries
    // round-off of order eps |k|; at large rho the interior rate cancels terms
    // of size detail::interior_rate_scale. Both floors are part of the tolerance.
    const double eps16 = 16.0 * std::numeric_limits<double>::epsilon();
    const double cancel = spec.regime == Regime::Interior && !is_unit_ratio(e.beta)
                              ? eps16 * detail::interior_rate_scale(spec)
                              : 0.0;
    if (cancel > kIllConditioned * std::max(1.0, r)) {
        throw ConvergenceError("solve_constrained: rate formula ill-conditioned at this rho", cancel);
    }
    const double floor = std::max(eps16 * std::fabs(k), cancel);
    if (std::fabs(err) > std::max(kRootTolerance * std::max(1.0, r), floor)) {
        throw ConvergenceError("solve_constrained: rate constraint not met", err);
    }
    spec.r = r;
    return spec;
}

/// Closed-form equilibrium density; zero outside the support.
///
/// Returns +infinity at exactly x = 0 for a hard-edge spectrum.
inline double density_at(const ConstrainedSpectrum& spec, double x) {
    const double rho = spec.rho;
    if (spec.regime == Regime::HardEdge) {
        if (x == 0.0) return std::numeric_limits<double>::infinity();
        if (!(x > 0.0) || !(x < spec.b)) return 0.0;
        const double shift = 1.0 - spec.k * rho / std::sqrt(1.0 + rho * spec.b);
        return std::sqrt(spec.b - x) / (2.0 * std::numbers::pi * (1.0 + rho * x) * std::sqrt(x)) *
               (rho * x + shift);
    }
    if (!(x > spec.a) || !(x < spec.b)) return 0.0;
    const double edge = std::sqrt((spec.b - x) * (x - spec.a));
    if (spec.beta == 1.0 || is_unit_ratio(spec.beta)) {
        return rho * edge / (2.0 * std::numbers::pi * (1.0 + rho * x));
    }
    const double c = (spec.beta - 1.0) / std::sqrt(spec.a * spec.b);
    return edge / (2.0 * std::numbers::pi * x * (1.0 + rho * x)) * (rho * x + c);
}

namespace detail {

// Density integrand in the angle theta of x = a + (b - a)(1 - cos theta)/2.
// This map absorbs both square-root edges and the hard-edge x^(-1/2), leaving a
// smooth integrand on [0, pi].
inline double cdf_integrand(const ConstrainedSpectrum& spec, double theta) {
    const double rho = spec.rho;
    if (spec.regime == Regime::HardEdge) {
        const double half = 0.5 * theta;
        const double x = spec.b * std::sin(half) * std::sin(half);
        const double shift = 1.0 - spec.k * rho / std::sqrt(1.0 + rho * spec.b);
        const double c = std::cos(half);
        return spec.b * c * c * (rho * x + shift) /
               (2.0 * std::numbers::pi * (1.0 + rho * x));
    }
    const double half_width = 0.5 * (spec.b - spec.a);
    const double x = spec.a + half_width * (1.0 - std::cos(theta));
    const double s = std::sin(theta);
    const double jac = half_width * half_width * s * s;
    if (is_unit_ratio(spec.beta)) {
        return jac * rho / (2.0 * std::numbers::pi * (1.0 + rho * x));
    }
    const double c = (spec.beta - 1.0) / std::sqrt(spec.a * spec.b);
    return jac * (rho * x + c) / (2.0 * std::numbers::pi * x * (1.0 + rho * x));
}

}  // namespace detail

/// Cumulative distribution of the equilibrium density at x.
inline double cdf_at(const ConstrainedSpectrum& spec, double x) {
    if (!(x > spec.a)) return 0.0;
    if (!(x < spec.b)) return 1.0;
    const double u = 1.0 - 2.0 * (x - spec.a) / (spec.b - spec.a);
    const double theta = std::acos(std::clamp(u, -1.0, 1.0));
    auto f = [&](double t) { return detail::cdf_integrand(spec, t); };
    const double v = detail::integrate(f, 0.0, theta, 1e-13);
    return std::clamp(v, 0.0, 1.0);
}

}  // namespace ldmimo
