#pragma once

// Large-deviations density and outage probability of the mutual information
// per transmit antenna, plus the O(1/N)-corrected density.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "baselines.hpp"
#include "energy.hpp"
#include "errors.hpp"
#include "outage.hpp"
#include "specfun.hpp"
#include "spectrum.hpp"

namespace ldmimo {

/// Above this value of N^2 (E1 - E0) the linear probability is reported as 0.
inline constexpr double kUnderflowExponent = 700.0;

/// Half-width of the near-peak window, in units of sqrt(v_erg), where the
/// pure Gaussian law replaces the Watson expression.
inline constexpr double kPeakWindow = 1e-3;

/// ln P_N(r) = ln(N / sqrt(2 pi v_erg)) - N^2 (E1(r) - E0).
inline double ld_log_pdf(const ChannelEnsemble& ens, int n, double r) {
    if (n < 1) throw DomainError("ld_log_pdf: n must be >= 1");
    if (!(r > 0.0)) throw DomainError("ld_log_pdf: rate must be positive");
    const double v = ergodic_stats(ens).v_erg;
    const double ex = excess_energy(solve_constrained(ens, r));
    const double nn = double(n);
    return std::log(nn / std::sqrt(2.0 * std::numbers::pi * v)) - nn * nn * ex;
}

inline double ld_pdf(const ChannelEnsemble& ens, int n, double r) {
    return std::exp(ld_log_pdf(ens, n, r));
}

/// Watson-lemma outage probability P(I_N <= N r).
inline OutageResult ld_outage(const ChannelEnsemble& ens, int n, double r) {
    if (n < 1) throw DomainError("ld_outage: n must be >= 1");
    if (!(r > 0.0)) throw DomainError("ld_outage: rate must be positive");
    const auto st = ergodic_stats(ens);
    OutageResult out{n, receive_count(ens, n), ens.rho, r};
    out.method = Method::LD;
    const double nn = double(n);
    const double sd = std::sqrt(st.v_erg);

    if (std::fabs(r - st.r_erg) <= kPeakWindow * sd) {
        const double z = nn * (st.r_erg - r) / sd;
        set_log_outage(out, z >= 0.0 ? q_fun_log(z) : q_fun_log_complement(-z));
        return out;
    }

    const auto pt = exponent(ens, r);
    if (!(pt.e1_second > 0.0)) {
        throw ConvergenceError("ld_outage: non-positive curvature", pt.e1_second);
    }
    const double shifted = pt.exponent - pt.k * pt.k / (2.0 * pt.e1_second);
    const double z = nn * std::fabs(pt.k) / std::sqrt(pt.e1_second);
    // ln of the Watson tail mass beyond r
    const double ln_tail =
        -nn * nn * shifted + q_fun_log(z) - 0.5 * std::log(pt.e1_second * st.v_erg);

    if (r < st.r_erg) {
        set_log_outage(out, std::min(0.0, ln_tail));
        if (nn * nn * pt.exponent > kUnderflowExponent) {
            out.p_out = 0.0;
            out.underflow = true;
        }
    } else {
        const double tail = std::exp(ln_tail);
        set_log_outage(out, tail >= 1.0 ? -std::numeric_limits<double>::infinity()
                                        : std::log1p(-tail));
        if (tail >= 1.0) out.p_out = 0.0;
    }
    return out;
}

/// Bracket multiplying the LD density in the O(1/N) correction.
inline double correction_bracket(double d, int n, double s3, double v, double s_erg_value) {
    const double nn = double(n);
    return 1.0 - s3 / (2.0 * v * v) * d +
           nn * nn / 6.0 * (s3 / (v * v * v) + s_erg_value) * d * d * d;
}

namespace detail {

// Smallest value of the cubic bracket on |d| <= w.
inline double min_bracket(double w, int n, double s3, double v, double s) {
    const double nn = double(n);
    const double alpha = s3 / (2.0 * v * v);
    const double gamma = nn * nn / 6.0 * (s3 / (v * v * v) + s);
    double lo = std::min(correction_bracket(-w, n, s3, v, s), correction_bracket(w, n, s3, v, s));
    if (gamma != 0.0 && alpha / (3.0 * gamma) > 0.0) {
        const double dc = std::sqrt(alpha / (3.0 * gamma));
        if (dc <= w) {
            lo = std::min({lo, correction_bracket(dc, n, s3, v, s),
                           correction_bracket(-dc, n, s3, v, s)});
        }
    }
    return lo;
}

}  // namespace detail

/// LD density times the O(1/N) correction bracket, clamped at zero.
///
/// `s_erg_override` replaces the computed third derivative at r_erg.
/// Throws DomainError when the bracket already goes negative within
/// 3 sqrt(v_erg)/N of the peak, which means s3 is not a plausible value.
inline double corrected_pdf(const ChannelEnsemble& ens, int n, double r, double s3,
                            std::optional<double> s_erg_override = std::nullopt) {
    if (n < 1) throw DomainError("corrected_pdf: n must be >= 1");
    const auto st = ergodic_stats(ens);
    const double s = s_erg_override ? *s_erg_override : s_erg(ens);
    const double w = 3.0 * std::sqrt(st.v_erg) / n;
    if (detail::min_bracket(w, n, s3, st.v_erg, s) < 0.0) {
        throw DomainError("corrected_pdf: correction bracket negative near the peak; check s3");
    }
    const double bracket = correction_bracket(r - st.r_erg, n, s3, st.v_erg, s);
    if (bracket <= 0.0) return 0.0;
    return ld_pdf(ens, n, r) * bracket;
}

}  // namespace ldmimo
