#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "ldmimo/distribution.hpp"
#include "oracle.hpp"

using namespace ldmimo;

TEST(LdPdf, PeakValue) {
    const ChannelEnsemble ens{2.0, 100.0};
    const auto st = ergodic_stats(ens);
    for (int n : {2, 5, 10}) {
        EXPECT_NEAR(ld_pdf(ens, n, st.r_erg), n / std::sqrt(2.0 * std::numbers::pi * st.v_erg), 1e-9) << n;
    }
}

TEST(LdPdf, NormalizedToLeadingOrder) {
    const ChannelEnsemble ens{2.0, 100.0};
    const int n = 5;
    const double hi = 4.0 * ergodic_stats(ens).r_erg;
    // the density is below 1e-70 under r = 1
    const double total = oracle::integrate([&](double r) { return ld_pdf(ens, n, r); }, 1.0, hi, 1e-8);
    EXPECT_NEAR(total, 1.0, 0.02);
}

TEST(LdPdf, GaussianWithCubicCorrectionNearPeak) {
    const ChannelEnsemble ens{2.0, 100.0};
    const int n = 5;
    const auto st = ergodic_stats(ens);
    const double s = s_erg(ens);
    const double peak = ld_log_pdf(ens, n, st.r_erg);
    const double w = std::sqrt(st.v_erg) / n;
    for (double f : {-1.0, -0.6, -0.3, 0.3, 0.6, 1.0}) {
        const double d = f * w;
        const double ld = (peak - ld_log_pdf(ens, n, st.r_erg + d)) / (n * n);
        const double parabola = d * d / (2.0 * st.v_erg);
        // exponent ~ d^2/(2v) + s_erg d^3/6, so the ratio is 1 + s_erg v d/3 to first order
        EXPECT_NEAR(ld / parabola, 1.0 + s * st.v_erg * d / 3.0, 5e-3) << f;
    }
}

TEST(LdOutage, LimitsAndMonotoneInRate) {
    const ChannelEnsemble ens{2.0, 10.0};
    const int n = 3;
    const double re = ergodic_stats(ens).r_erg;
    double prev = 0.0;
    for (double f = 0.05; f <= 2.5; f += 0.05) {
        const auto o = ld_outage(ens, n, f * re);
        EXPECT_GE(o.p_out, prev) << f;
        EXPECT_GE(o.p_out, 0.0);
        EXPECT_LE(o.p_out, 1.0);
        prev = o.p_out;
    }
    EXPECT_LT(ld_outage(ens, n, 1e-3).p_out, 1e-20);
    EXPECT_NEAR(ld_outage(ens, n, 3.0 * re).p_out, 1.0, 1e-12);
}

TEST(LdOutage, NonincreasingInSnr) {
    const int n = 3;
    for (double r : {0.5, 1.5, 3.0}) {
        double prev = 1.0;
        for (double db = 0.0; db <= 30.0; db += 2.5) {
            const auto o = ld_outage({1.0, std::pow(10.0, db / 10.0)}, n, r);
            EXPECT_LE(o.p_out, prev + 1e-15) << r << " " << db;
            prev = o.p_out;
        }
    }
}

TEST(LdOutage, ApproachesZeroMonotonicallyAtSmallRate) {
    const ChannelEnsemble ens{1.0, 1.0};
    double prev = 1.0;
    for (double r : {0.3, 0.1, 0.03, 0.01, 0.003}) {
        const auto o = ld_outage(ens, 2, r);
        EXPECT_LT(o.log10_p_out, std::log10(prev));
        prev = std::pow(10.0, o.log10_p_out);
    }
}

TEST(LdOutage, AgreesWithIntegratedDensity) {
    const ChannelEnsemble ens{2.0, 100.0};
    const int n = 5;
    const double re = ergodic_stats(ens).r_erg;
    for (double r : {4.0, 4.3, 4.6, 4.8}) {
        const double integral = oracle::integrate([&](double t) { return ld_pdf(ens, n, t); }, 1.0, r, 1e-10);
        ASSERT_GE(integral, 1e-8);
        EXPECT_NEAR(ld_outage(ens, n, r).p_out / integral, 1.0, 0.10) << r;
    }
    EXPECT_LT(4.8, re);
}

TEST(LdOutage, PeakPatchIsGaussianAndNearlyContinuous) {
    const ChannelEnsemble ens{2.0, 10.0};
    const auto st = ergodic_stats(ens);
    const double edge = kPeakWindow * std::sqrt(st.v_erg);
    for (double side : {-1.0, 1.0}) {
        const double d = side * 0.99 * edge;
        const double inside = ld_outage(ens, 4, st.r_erg + d).p_out;
        EXPECT_NEAR(inside, q_fun(-4.0 * d / std::sqrt(st.v_erg)), 1e-15);
        // the step at the window edge is the skew term the Gaussian patch drops
        const double outside = ld_outage(ens, 4, st.r_erg + side * 1.01 * edge).p_out;
        EXPECT_NEAR(inside, outside, 1e-3);
    }
    EXPECT_NEAR(ld_outage(ens, 4, st.r_erg).p_out, 0.5, 1e-12);
}

TEST(LdOutage, DeepTailUnderflowKeepsLogValue) {
    const auto o = ld_outage({2.0, 100.0}, 40, 0.5);
    EXPECT_TRUE(o.underflow);
    EXPECT_EQ(o.p_out, 0.0);
    EXPECT_TRUE(std::isfinite(o.log10_p_out));
    EXPECT_LT(o.log10_p_out, -300.0);
}

TEST(Ordering, GaussianAboveLdForSquareChannelsBelowErgodicRate) {
    for (double db : {-10.0, 0.0, 10.0, 20.0}) {
        const ChannelEnsemble ens{1.0, std::pow(10.0, db / 10.0)};
        const double re = ergodic_stats(ens).r_erg;
        for (double f : {0.3, 0.5, 0.7, 0.9}) {
            EXPECT_GE(gaussian_outage(ens, 3, f * re).p_out, ld_outage(ens, 3, f * re).p_out) << db << " " << f;
        }
    }
}

TEST(Ordering, GaussianBelowLdForBetaTwoAtHighSnr) {
    for (double db : {30.0, 40.0}) {
        const ChannelEnsemble ens{2.0, std::pow(10.0, db / 10.0)};
        const double re = ergodic_stats(ens).r_erg;
        for (double f : {0.6, 0.8, 0.95}) {
            EXPECT_LE(gaussian_outage(ens, 3, f * re).p_out, ld_outage(ens, 3, f * re).p_out) << db << " " << f;
        }
    }
}

TEST(CorrectedPdf, ReducesToLdWithoutCorrection) {
    const ChannelEnsemble ens{2.0, 100.0};
    for (double r : {4.0, 5.0, 6.0}) {
        EXPECT_DOUBLE_EQ(corrected_pdf(ens, 2, r, 0.0, 0.0), ld_pdf(ens, 2, r));
    }
}

TEST(CorrectedPdf, BracketIsOneAtPeak) {
    for (double s3 : {-0.5, 0.0, 0.3}) EXPECT_DOUBLE_EQ(correction_bracket(0.0, 2, s3, 0.7, 1.5), 1.0);
    const ChannelEnsemble ens{2.0, 100.0};
    const auto st = ergodic_stats(ens);
    EXPECT_NEAR(corrected_pdf(ens, 2, st.r_erg, 0.1, 0.0), ld_pdf(ens, 2, st.r_erg), 1e-12);
}

TEST(CorrectedPdf, ClampsFarTailAndRejectsImplausibleS3) {
    const ChannelEnsemble ens{2.0, 100.0};
    const auto st = ergodic_stats(ens);
    // with s3 = 0 the bracket 1 + (N^2/6) s d^3 crosses zero at d = 1.44, outside 3 sqrt(v)/N = 1.23
    const double s = -0.5;
    EXPECT_EQ(corrected_pdf(ens, 2, st.r_erg + 8.0, 0.0, s), 0.0);
    EXPECT_GT(corrected_pdf(ens, 2, st.r_erg + 0.1, 0.0, s), 0.0);
    EXPECT_THROW(corrected_pdf(ens, 2, st.r_erg, 50.0, 0.0), DomainError);
}

namespace {

void expect_between_gaussian_and_ld(int n, const std::function<double(double)>& corrected) {
    const ChannelEnsemble ens{2.0, 100.0};
    const auto st = ergodic_stats(ens);
    const double sd = std::sqrt(st.v_erg) / n;
    for (double f : {-0.8, -0.4, 0.4, 0.8}) {
        const double r = st.r_erg + f * sd;
        const double gauss = std::exp(-0.5 * f * f) / (std::sqrt(2.0 * std::numbers::pi) * sd);
        const double ld = ld_pdf(ens, n, r);
        const double c = corrected(r);
        EXPECT_GE(c, std::min(gauss, ld)) << n << " " << f;
        EXPECT_LE(c, std::max(gauss, ld)) << n << " " << f;
    }
}

}  // namespace

TEST(CorrectedPdf, BetweenGaussianAndLdNearPeak) {
    // N=2, M=4, 20 dB: the corrected product lies between the two curves for s3 = 0.02,
    // but the bracket dips below zero inside 3 sqrt(v)/N there, so corrected_pdf rejects it
    const ChannelEnsemble ens{2.0, 100.0};
    const auto st = ergodic_stats(ens);
    const double s = s_erg(ens), s3 = 0.02;
    expect_between_gaussian_and_ld(2, [&](double r) {
        return ld_pdf(ens, 2, r) * correction_bracket(r - st.r_erg, 2, s3, st.v_erg, s);
    });
    EXPECT_THROW(corrected_pdf(ens, 2, st.r_erg, s3), DomainError);
    // at N=4 the same s3 passes the plausibility check
    expect_between_gaussian_and_ld(4, [&](double r) { return corrected_pdf(ens, 4, r, s3); });
}
