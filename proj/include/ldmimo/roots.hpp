#pragma once

#include <cmath>
#include <string>

#include "errors.hpp"

namespace ldmimo::detail {

struct BisectionResult {
    double root;
    double residual;
    int iterations;
};

/// Bisection on a sign-changing bracket [lo, hi].
///
/// `f` must have opposite signs at the endpoints. Iterates until the bracket
/// cannot shrink further in floating point or `max_iter` is hit. When both
/// endpoints are positive and far apart the midpoint is geometric, so brackets
/// spanning many decades (supports of width 1/rho) resolve in relative terms.
template <class F>
BisectionResult bisect(F&& f, double lo, double hi, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return {lo, 0.0, 0};
    if (fhi == 0.0) return {hi, 0.0, 0};
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw ConvergenceError("bisect: bracket does not enclose a sign change",
                               std::fabs(flo) < std::fabs(fhi) ? flo : fhi);
    }
    int it = 0;
    for (; it < max_iter; ++it) {
        double mid;
        if (lo > 0.0 && hi > 4.0 * lo) {
            mid = std::sqrt(lo) * std::sqrt(hi);
        } else if (hi < 0.0 && lo < 4.0 * hi) {
            mid = -std::sqrt(-lo) * std::sqrt(-hi);
        } else {
            mid = lo + 0.5 * (hi - lo);
        }
        if (!(mid > lo && mid < hi)) break;
        const double fm = f(mid);
        if (fm == 0.0) return {mid, 0.0, it + 1};
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    if (std::fabs(flo) <= std::fabs(fhi)) return {lo, flo, it};
    return {hi, fhi, it};
}

}  // namespace ldmimo::detail
