#pragma once

#include <cmath>
#include <limits>
#include <string_view>

namespace ldmimo {

enum class Method { LD, Gaussian, TRT, DMT, MC, LDCorrected };

inline std::string_view method_name(Method m) {
    switch (m) {
        case Method::LD: return "ld";
        case Method::Gaussian: return "gaussian";
        case Method::TRT: return "trt";
        case Method::DMT: return "dmt";
        case Method::MC: return "mc";
        case Method::LDCorrected: return "ld-corrected";
    }
    return "unknown";
}

/// Outage probability P(I_N <= N r) at one operating point.
///
/// `p_out` underflows to 0 for deep tails; `log10_p_out` stays finite and
/// `underflow` is set.
struct OutageResult {
    int n = 0;
    int m = 0;
    double rho = 0.0;
    double r = 0.0;
    double p_out = 0.0;
    double log10_p_out = -std::numeric_limits<double>::infinity();
    Method method = Method::LD;
    bool underflow = false;
    double std_error = std::numeric_limits<double>::quiet_NaN();  // MC only
};

/// Fills probability fields from a natural-log outage value.
inline void set_log_outage(OutageResult& out, double ln_p) {
    out.log10_p_out = ln_p / std::log(10.0);
    out.p_out = std::exp(ln_p);
    out.underflow = out.p_out < std::numeric_limits<double>::min() && std::isfinite(ln_p);
    if (out.underflow) out.p_out = 0.0;
}

}  // namespace ldmimo
