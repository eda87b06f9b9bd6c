#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ldmimo/baselines.hpp"
#include "ldmimo/energy.hpp"
#include "oracle.hpp"

using namespace ldmimo;

namespace {

double integrate_density(const ConstrainedSpectrum& sp, const std::function<double(double, double)>& w) {
    return oracle::tanh_sinh(
        [&](double x, double dl, double) { return density_at(sp, x) * w(x, dl); }, sp.a, sp.b, 1e-13);
}

// Minimum energy from the stationarity-reduced single integrals:
// E1 = <x>/2 - (beta-1)/2 <log x> - <log(x-a)> + (k (r - log(1+rho a)) + a - (beta-1) log a)/2.
// At a = 0 (hard edge) <log(x-a)> and <log x> coincide and the a-terms vanish.
double e1_oracle(const ConstrainedSpectrum& sp) {
    const double c = sp.beta - 1.0;
    const double mean = integrate_density(sp, [](double x, double) { return x; });
    const double log_gap = integrate_density(sp, [](double, double dl) { return std::log(dl); });
    double v = 0.5 * mean - log_gap + 0.5 * sp.k * (sp.r - std::log1p(sp.rho * sp.a));
    if (sp.a > 0.0) {
        const double log_x = integrate_density(sp, [](double x, double) { return std::log(x); });
        v += -0.5 * c * log_x + 0.5 * (sp.a - c * std::log(sp.a));
    }
    return v;
}

}  // namespace

TEST(E0, UnitRatioIsThreeHalves) { EXPECT_NEAR(e0(1.0), 1.5, 1e-12); }

TEST(E0, MatchesQuadratureOfMarchenkoPasturEnergy) {
    for (double beta : {1.5, 2.0, 4.0}) {
        const auto mp = unconstrained_spectrum(beta);
        const auto p = [&](double x, double dl, double dr) {
            return std::sqrt(dl * dr) / (2.0 * std::numbers::pi * x);
        };
        const double c = beta - 1.0;
        const double mean = oracle::tanh_sinh([&](double x, double dl, double dr) { return x * p(x, dl, dr); },
                                              mp.a, mp.b);
        const double log_x = oracle::tanh_sinh(
            [&](double x, double dl, double dr) { return std::log(x) * p(x, dl, dr); }, mp.a, mp.b);
        const double log_gap = oracle::tanh_sinh(
            [&](double x, double dl, double dr) { return std::log(dl) * p(x, dl, dr); }, mp.a, mp.b);
        const double want = 0.5 * mean + 0.5 * (mp.a - c * std::log(mp.a)) - 0.5 * c * log_x - log_gap;
        EXPECT_NEAR(e0(beta), want, 1e-7) << beta;
    }
}

TEST(E1, ClosedFormsMatchQuadrature) {
    struct P {
        double beta, rho, r;
    };
    for (auto c : {P{2.0, 100.0, 3.0}, P{2.0, 100.0, 7.0}, P{4.0, 10.0, 2.0}, P{1.5, 1000.0, 6.0},
                   P{1.0, 100.0, 2.0}, P{1.0, 100.0, 6.0}, P{1.0, 10.0, 0.5}}) {
        const auto sp = solve_constrained({c.beta, c.rho}, c.r);
        EXPECT_NEAR(e1(sp), e1_oracle(sp), 1e-8) << c.beta << " " << c.rho << " " << c.r;
    }
}

TEST(Exponent, UnitRatioSpotValue) {
    const auto sp = spectrum_at_tilt({1.0, 100.0}, 1.0);
    EXPECT_NEAR(excess_energy(sp), 0.49, 1e-8);
    EXPECT_NEAR(sp.r, std::log(100.0) + 2.0 * std::log(2.0) - 1.0, 1e-8);
}

TEST(Exponent, ZeroAtErgodicRateAndPositiveElsewhere) {
    for (double beta : {1.0, 2.0}) {
        const ChannelEnsemble ens{beta, 10.0};
        const double re = ergodic_stats(ens).r_erg;
        EXPECT_NEAR(excess_energy(solve_constrained(ens, re)), 0.0, 1e-9);
        for (double f : {0.2, 0.7, 1.3, 2.0}) EXPECT_GT(excess_energy(solve_constrained(ens, f * re)), 0.0);
    }
}

TEST(Exponent, FirstDerivativeIsTilt) {
    for (double beta : {1.0, 2.0, 4.0}) {
        const ChannelEnsemble ens{beta, 100.0};
        for (double r : {1.0, 4.0, 8.0}) {
            const double h = 1e-5;
            const double d = (excess_energy(solve_constrained(ens, r + h)) -
                              excess_energy(solve_constrained(ens, r - h))) /
                             (2.0 * h);
            const double k = solve_constrained(ens, r).k;
            EXPECT_NEAR(d, k, 1e-3 * std::max(1.0, std::fabs(k))) << beta << " " << r;
        }
    }
}

TEST(Exponent, CurvatureAtErgodicRateIsInverseVariance) {
    for (double beta : {1.0, 2.0, 4.0}) {
        for (double rho : {1.0, 100.0}) {
            const ChannelEnsemble ens{beta, rho};
            const auto st = ergodic_stats(ens);
            const auto pt = exponent(ens, st.r_erg);
            EXPECT_NEAR(pt.e1_second * st.v_erg, 1.0, 1e-3) << beta << " " << rho;
        }
    }
}

TEST(Exponent, ConvexInRate) {
    const ChannelEnsemble ens{2.0, 10.0};
    for (double r : {0.3, 1.0, 2.0, 4.0, 6.0}) EXPECT_GT(exponent(ens, r).e1_second, 0.0) << r;
}

TEST(Serg, SignPattern) {
    EXPECT_LT(s_erg({1.0, 10.0}), 0.0);
    EXPECT_LT(s_erg({1.0, 1e6}), 0.0);
    EXPECT_GT(s_erg({2.0, 1e6}), 0.0);
}

TEST(Serg, LargeSnrAsymptoteForBetaAboveOne) {
    for (double beta : {2.0, 4.0}) {
        const double want = s_erg_asymptote(beta, 1e6);
        EXPECT_NEAR(s_erg({beta, 1e6}), want, 1e-3 * std::fabs(want)) << beta;
    }
}

TEST(Serg, UnitRatioMatchesHighPrecisionValue) {
    // 50-digit differentiation of the hard-edge closed form at rho = 1e6
    EXPECT_NEAR(s_erg({1.0, 1e6}), -1.03953e-3, 2e-7);
}
