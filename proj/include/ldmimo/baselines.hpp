#pragma once

// Comparison curves: ergodic mean/variance, the Gaussian outage law, the
// diversity-multiplexing exponent, the finite-rate piecewise-linear (TRT)
// model and the closed-form regime asymptotes.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "outage.hpp"
#include "specfun.hpp"
#include "spectrum.hpp"

namespace ldmimo {

struct ErgodicStats {
    double u = 1.0;
    double r_erg = 0.0;  // nats per antenna
    double v_erg = 0.0;  // variance of the total mutual information
};

inline ErgodicStats ergodic_stats(const ChannelEnsemble& ens) {
    validate(ens);
    const double beta = ens.beta;
    const double rho = ens.rho;
    const double c = 1.0 + rho * (beta - 1.0);
    const double root = std::sqrt(c * c + 4.0 * rho);
    // u - 1 without cancellation as rho -> 0
    const double um1 = (c < 2.0) ? 2.0 * rho * beta / (root + 2.0 - c) : 0.5 * (c - 2.0 + root);
    const double u = 1.0 + um1;
    ErgodicStats s;
    s.u = u;
    s.r_erg = std::log1p(um1) + beta * std::log1p(rho / u) - um1 / u;
    s.v_erg = -std::log1p(-(um1 * um1) / (beta * u * u));
    return s;
}

inline int receive_count(const ChannelEnsemble& ens, int n) {
    return static_cast<int>(std::lround(ens.beta * n));
}

/// P(I_N <= N r) under the Gaussian law with mean N r_erg and variance v_erg.
inline OutageResult gaussian_outage(const ChannelEnsemble& ens, int n, double r) {
    if (n < 1) throw DomainError("gaussian_outage: n must be >= 1");
    const auto st = ergodic_stats(ens);
    OutageResult out{n, receive_count(ens, n), ens.rho, r};
    out.method = Method::Gaussian;
    const double z = n * (st.r_erg - r) / std::sqrt(st.v_erg);
    set_log_outage(out, z >= 0.0 ? q_fun_log(z) : q_fun_log_complement(-z));
    return out;
}

/// Diversity-multiplexing exponent (1 - q)(beta - q), q = r / log rho.
inline double dmt_exponent(double beta, double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("dmt_exponent: q must lie in (0, 1)");
    return (1.0 - q) * (beta - q);
}

/// Outage from the DMT exponent alone: log P = -N^2 log(rho) (1-q)(beta-q).
inline OutageResult dmt_outage(const ChannelEnsemble& ens, int n, double r) {
    if (!(ens.rho > 1.0)) throw DomainError("dmt_outage: requires rho > 1");
    OutageResult out{n, receive_count(ens, n), ens.rho, r};
    out.method = Method::DMT;
    const double lr = std::log(ens.rho);
    const double q = r / lr;
    const double ln_p = (q >= 1.0) ? 0.0 : -double(n) * n * lr * dmt_exponent(ens.beta, std::max(q, 1e-300));
    set_log_outage(out, ln_p);
    return out;
}

/// Piecewise-linear log2 outage of the finite-rate high-SNR model, R in bits total.
///
/// Segment k covers k log2(rho) < R <= (k+1) log2(rho); an exact breakpoint
/// belongs to the lower segment.
inline double trt_log2_outage(int n, int m, double rho, double r_bits_total) {
    if (n < 1 || m < n) throw DomainError("trt_log2_outage: requires m >= n >= 1");
    if (!(rho > 1.0)) throw DomainError("trt_log2_outage: requires log2(rho) > 0");
    const double l2 = std::log2(rho);
    const double seg = std::ceil(r_bits_total / l2) - 1.0;
    const int k = static_cast<int>(std::clamp(seg, 0.0, double(n - 1)));
    const double c = m + n - 2.0 * k - 1.0;
    const double g = double(m) * n - double(k) * (k + 1);
    return c * r_bits_total - g * l2;
}

/// TRT outage at a per-antenna rate in nats, capped at probability one.
inline OutageResult trt_outage(int n, int m, double rho, double r) {
    OutageResult out{n, m, rho, r};
    out.method = Method::TRT;
    const double bits = n * r / std::numbers::ln2;
    const double log2_p = std::min(0.0, trt_log2_outage(n, m, rho, bits));
    set_log_outage(out, log2_p * std::numbers::ln2);
    return out;
}

struct TailExponents {
    double high_rate = 0.0;  // e^r / rho
    double low_rate = 0.0;   // -beta log(e r / (beta rho))
};

inline TailExponents tail_exponents(const ChannelEnsemble& ens, double r) {
    if (!(r > 0.0)) throw DomainError("tail_exponents: rate must be positive");
    return {std::exp(r) / ens.rho,
            -ens.beta * std::log(std::numbers::e * r / (ens.beta * ens.rho))};
}

/// Large-rho limit of the third derivative of the exponent at the ergodic rate.
inline double s_erg_asymptote(double beta, double rho) {
    if (is_unit_ratio(beta)) {
        const double l = std::log(rho);
        return -2.0 / (l * l * l);
    }
    const double l = std::log1p(-1.0 / beta);
    return -1.0 / (beta * (beta - 1.0) * l * l * l);
}

}  // namespace ldmimo
