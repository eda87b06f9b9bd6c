#pragma once

#include <array>
#include <cmath>
#include <utility>

namespace ldmimo::detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

/// One G7/K15 panel: returns {kronrod estimate, |kronrod - gauss|}.
template <class F>
std::pair<double, double> gauss_kronrod15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kKronrodNodes[j];
        const double fsum = f(c - dx) + f(c + dx);
        kron += kKronrodWeights[j] * fsum;
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * fsum;
    }
    return {kron * h, std::fabs((kron - gauss) * h)};
}

template <class F>
double adaptive_gk_step(F& f, double a, double b, double whole, double err, double tol,
                        int depth) {
    if (err <= tol || depth <= 0 || !(b - a > 0.0)) return whole;
    const double m = 0.5 * (a + b);
    const auto [left, el] = gauss_kronrod15(f, a, m);
    const auto [right, er] = gauss_kronrod15(f, m, b);
    if (std::fabs(left + right - whole) <= tol && el + er <= tol) return left + right;
    return adaptive_gk_step(f, a, m, left, el, 0.5 * tol, depth - 1) +
           adaptive_gk_step(f, m, b, right, er, 0.5 * tol, depth - 1);
}

/// Adaptive Gauss-Kronrod quadrature of a smooth (or mildly singular) integrand.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-12, int max_depth = 40) {
    if (a == b) return 0.0;
    const auto [whole, err] = gauss_kronrod15(f, a, b);
    return adaptive_gk_step(f, a, b, whole, err, abs_tol, max_depth);
}

}  // namespace ldmimo::detail
