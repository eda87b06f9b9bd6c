#pragma once

// Sweep description, validation, evaluation and table serialization shared by
// the command-line tool and its tests.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "baselines.hpp"
#include "distribution.hpp"
#include "energy.hpp"
#include "errors.hpp"
#include "montecarlo.hpp"
#include "outage.hpp"
#include "spectrum.hpp"

namespace ldmimo {

enum class Quantity { Density, Cdf, Exponent, Pdf, OutageVsRate, OutageVsSnr, SergVsSnr };
enum class GridScale { Linear, Log, Db };
enum class RateUnits { NatsPerAntenna, BitsTotal };

inline std::string_view quantity_name(Quantity q) {
    switch (q) {
        case Quantity::Density: return "density";
        case Quantity::Cdf: return "cdf";
        case Quantity::Exponent: return "exponent";
        case Quantity::Pdf: return "pdf";
        case Quantity::OutageVsRate: return "outage-vs-rate";
        case Quantity::OutageVsSnr: return "outage-vs-snr";
        case Quantity::SergVsSnr: return "serg-vs-snr";
    }
    return "unknown";
}

inline std::optional<Quantity> parse_quantity(std::string_view s) {
    for (auto q : {Quantity::Density, Quantity::Cdf, Quantity::Exponent, Quantity::Pdf,
                   Quantity::OutageVsRate, Quantity::OutageVsSnr, Quantity::SergVsSnr}) {
        if (quantity_name(q) == s) return q;
    }
    return std::nullopt;
}

inline std::optional<Method> parse_method(std::string_view s) {
    for (auto m : {Method::LD, Method::Gaussian, Method::TRT, Method::DMT, Method::MC, Method::LDCorrected}) {
        if (method_name(m) == s) return m;
    }
    return std::nullopt;
}

inline std::optional<GridScale> parse_scale(std::string_view s) {
    if (s == "linear") return GridScale::Linear;
    if (s == "log") return GridScale::Log;
    if (s == "db") return GridScale::Db;
    return std::nullopt;
}

inline std::string_view scale_name(GridScale s) {
    switch (s) {
        case GridScale::Linear: return "linear";
        case GridScale::Log: return "log";
        case GridScale::Db: return "db";
    }
    return "linear";
}

inline std::optional<RateUnits> parse_units(std::string_view s) {
    if (s == "nats-per-antenna") return RateUnits::NatsPerAntenna;
    if (s == "bits-total") return RateUnits::BitsTotal;
    return std::nullopt;
}

/// Total bits per channel use for a per-antenna rate in nats.
inline double to_bits_total(double r_nats, int n) { return n * r_nats / std::numbers::ln2; }
inline double to_nats_per_antenna(double r_bits, int n) { return r_bits * std::numbers::ln2 / n; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double rho) { return 10.0 * std::log10(rho); }

struct Grid {
    double start = 0.0;
    double stop = 1.0;
    int points = 2;
    GridScale scale = GridScale::Linear;

    /// Grid values in the sweep's own units; a db scale returns the dB values.
    std::vector<double> values() const {
        std::vector<double> v(std::max(points, 0));
        for (int i = 0; i < points; ++i) {
            const double t = points > 1 ? double(i) / (points - 1) : 0.0;
            if (scale == GridScale::Log) {
                v[i] = std::exp(std::log(start) + t * (std::log(stop) - std::log(start)));
            } else {
                v[i] = start + t * (stop - start);
            }
        }
        if (points > 1) v.back() = stop;
        return v;
    }
};

struct McSettings {
    std::uint64_t trials = 0;
    std::uint64_t seed = 1;
    int streams = 1;
};

struct SweepSpec {
    Quantity quantity = Quantity::OutageVsRate;
    std::vector<Method> methods{Method::LD};
    Grid grid;
    int n_tx = 1;
    int n_rx = 1;
    double snr_db = 0.0;                  // fixed SNR for rate and spectrum sweeps
    std::optional<double> rate;           // fixed rate for snr and spectrum sweeps, in `units`
    RateUnits units = RateUnits::NatsPerAntenna;
    std::optional<McSettings> mc;
    std::optional<double> s3;
    int jobs = 1;
};

inline bool is_snr_sweep(Quantity q) { return q == Quantity::OutageVsSnr || q == Quantity::SergVsSnr; }
inline bool is_spectrum_sweep(Quantity q) { return q == Quantity::Density || q == Quantity::Cdf; }

inline bool method_supported(Quantity q, Method m) {
    switch (q) {
        case Quantity::Density:
        case Quantity::Cdf: return m == Method::LD || m == Method::MC;
        case Quantity::Exponent: return m == Method::LD || m == Method::Gaussian || m == Method::DMT;
        case Quantity::Pdf:
            return m == Method::LD || m == Method::Gaussian || m == Method::MC || m == Method::LDCorrected;
        case Quantity::OutageVsRate:
        case Quantity::OutageVsSnr: return m != Method::LDCorrected;
        case Quantity::SergVsSnr: return m == Method::LD;
    }
    return false;
}

/// Every violation in the sweep description; an empty result means it can run.
inline std::vector<std::string> validate(const SweepSpec& s) {
    std::vector<std::string> d;
    const auto has = [&](Method m) { return std::find(s.methods.begin(), s.methods.end(), m) != s.methods.end(); };
    if (s.methods.empty()) d.emplace_back("at least one method is required");
    std::set<Method> seen;
    for (auto m : s.methods) {
        if (!seen.insert(m).second) d.push_back("method listed twice: " + std::string(method_name(m)));
        if (!method_supported(s.quantity, m)) {
            d.push_back("method " + std::string(method_name(m)) + " is not available for quantity " +
                        std::string(quantity_name(s.quantity)));
        }
    }
    if (s.n_tx < 1 || s.n_rx < 1) d.emplace_back("antenna counts must be >= 1");
    if (s.grid.points < 2) d.emplace_back("grid needs at least 2 points");
    if (!(std::isfinite(s.grid.start) && std::isfinite(s.grid.stop)) || !(s.grid.start < s.grid.stop)) {
        d.emplace_back("grid start must be less than grid stop");
    }
    if (s.grid.scale == GridScale::Log && !(s.grid.start > 0.0)) d.emplace_back("log grid requires start > 0");
    if (is_snr_sweep(s.quantity)) {
        if (s.grid.scale == GridScale::Log) d.emplace_back("snr grids are in dB; use a linear or db scale");
    } else if (s.grid.scale == GridScale::Db) {
        d.emplace_back("db scale applies only to snr sweeps");
    }
    if (!std::isfinite(s.snr_db)) d.emplace_back("snr must be finite");
    if (s.quantity == Quantity::OutageVsSnr || is_spectrum_sweep(s.quantity)) {
        if (!s.rate) d.emplace_back("quantity " + std::string(quantity_name(s.quantity)) + " needs a fixed rate");
    }
    if (s.rate && !(*s.rate > 0.0)) d.emplace_back("rate must be positive");
    if (!is_snr_sweep(s.quantity) && !is_spectrum_sweep(s.quantity) && !(s.grid.start > 0.0)) {
        d.emplace_back("rate grid must be positive");
    }
    if (is_spectrum_sweep(s.quantity) && s.grid.start < 0.0) d.emplace_back("eigenvalue grid must be nonnegative");

    if (has(Method::MC) && !s.mc) d.emplace_back("mc settings required (set --trials)");
    if (!has(Method::MC) && s.mc) d.emplace_back("mc settings given but method mc not requested");
    if (s.mc) {
        if (s.mc->trials < 1) d.emplace_back("mc trials must be >= 1");
        if (s.mc->streams < 1) d.emplace_back("mc streams must be >= 1");
    }
    if (has(Method::LDCorrected) && !s.s3) d.emplace_back("s3 required for method ld-corrected");
    if (!has(Method::LDCorrected) && s.s3) d.emplace_back("s3 given but method ld-corrected not requested");
    if (s.jobs < 1) d.emplace_back("jobs must be >= 1");

    if (has(Method::TRT) || has(Method::DMT)) {
        const double lo = is_snr_sweep(s.quantity) ? std::min(s.grid.start, s.grid.stop) : s.snr_db;
        // the effective SNR after normalization is rho*beta when n_rx < n_tx
        const double boost =
            (s.n_rx < s.n_tx && s.n_rx > 0) ? linear_to_db(double(s.n_tx) / s.n_rx) : 0.0;
        if (!(lo + boost > 0.0)) {
            d.emplace_back("trt and dmt require log2(rho) > 0, i.e. SNR above 0 dB over the whole grid");
        }
    }
    return d;
}

/// One output row. `x` is the swept variable in the grid's own units.
struct Row {
    std::string method;
    int n = 0;
    int m = 0;
    double rho_db = 0.0;
    double r = std::numeric_limits<double>::quiet_NaN();
    double x = std::numeric_limits<double>::quiet_NaN();
    double value = std::numeric_limits<double>::quiet_NaN();
    double log10_value = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";

    double r_bits_total() const { return std::isfinite(r) ? to_bits_total(r, n) : r; }
};

struct SweepResult {
    std::vector<Row> rows;
    int failures = 0;
};

namespace detail {

inline double log10_of(double v) {
    return v > 0.0 ? std::log10(v) : (v == 0.0 ? -std::numeric_limits<double>::infinity()
                                               : std::numeric_limits<double>::quiet_NaN());
}

inline void set_value(Row& row, double v) {
    row.value = v;
    row.log10_value = log10_of(v);
}

inline void set_outage(Row& row, const OutageResult& o) {
    row.value = o.p_out;
    row.log10_value = o.log10_p_out;
    row.std_error = o.std_error;
}

inline double gaussian_density(const ChannelEnsemble& ens, int n, double r) {
    const auto st = ergodic_stats(ens);
    const double z = n * (r - st.r_erg) / std::sqrt(st.v_erg);
    return n / std::sqrt(2.0 * std::numbers::pi * st.v_erg) * std::exp(-0.5 * z * z);
}

struct PointContext {
    NormalizedChannel ch;
    double rho_db = 0.0;
    double r = std::numeric_limits<double>::quiet_NaN();  // nats per antenna
};

// MC data shared by every grid point of one SNR, computed once.
struct McCache {
    std::optional<McAccumulator> info;
    std::optional<ConditionedSample> conditioned;
    std::string error;
};

inline McConfig mc_config(const SweepSpec& s, const NormalizedChannel& ch) {
    McConfig c;
    c.n = ch.n;
    c.m = receive_count(ch.ensemble, ch.n);
    c.rho = ch.ensemble.rho;
    c.trials = s.mc->trials;
    c.seed = s.mc->seed;
    c.streams = s.mc->streams;
    c.jobs = 1;
    return c;
}

inline double fixed_rate_nats(const SweepSpec& s, int n) {
    return s.units == RateUnits::BitsTotal ? to_nats_per_antenna(*s.rate, n) : *s.rate;
}

inline double grid_rate_nats(const SweepSpec& s, double g, int n) {
    return s.units == RateUnits::BitsTotal ? to_nats_per_antenna(g, n) : g;
}

// [lo, hi] is the histogram bin around grid value g, in grid units.
inline void evaluate(const SweepSpec& s, Method method, double g, double lo, double hi, const PointContext& pc,
                     const McCache& mc, Row& row) {
    const auto& ens = pc.ch.ensemble;
    const int n = pc.ch.n;
    switch (s.quantity) {
        case Quantity::Density:
        case Quantity::Cdf: {
            if (method == Method::LD) {
                const auto sp = solve_constrained(ens, pc.r);
                set_value(row, s.quantity == Quantity::Density ? density_at(sp, g) : cdf_at(sp, g));
            } else {
                if (!mc.conditioned) throw InsufficientAcceptance(mc.error);
                const auto& c = *mc.conditioned;
                if (s.quantity == Quantity::Cdf) {
                    set_value(row, c.cdf(g));
                } else {
                    const double a = std::max(0.0, lo);
                    set_value(row, (c.cdf(hi) - c.cdf(std::nextafter(a, -1.0))) / (hi - a));
                }
            }
            return;
        }
        case Quantity::Exponent: {
            if (method == Method::LD) {
                set_value(row, excess_energy(solve_constrained(ens, pc.r)));
            } else if (method == Method::Gaussian) {
                const auto st = ergodic_stats(ens);
                set_value(row, (pc.r - st.r_erg) * (pc.r - st.r_erg) / (2.0 * st.v_erg));
            } else {
                const double lr = std::log(ens.rho);
                const double q = pc.r / lr;
                set_value(row, q >= 1.0 ? 0.0 : lr * dmt_exponent(ens.beta, q));
            }
            return;
        }
        case Quantity::Pdf: {
            if (method == Method::LD) {
                const double lp = ld_log_pdf(ens, n, pc.r);
                row.value = std::exp(lp);
                row.log10_value = lp / std::numbers::ln10;
            } else if (method == Method::Gaussian) {
                set_value(row, gaussian_density(ens, n, pc.r));
            } else if (method == Method::LDCorrected) {
                set_value(row, corrected_pdf(ens, n, pc.r, *s.s3));
            } else {
                const auto& acc = *mc.info;
                const double r_lo = grid_rate_nats(s, lo, n), r_hi = grid_rate_nats(s, hi, n);
                const double h = r_hi - r_lo;
                const auto a = std::upper_bound(acc.info.begin(), acc.info.end(), n * r_lo) - acc.info.begin();
                const auto b = std::upper_bound(acc.info.begin(), acc.info.end(), n * r_hi) - acc.info.begin();
                const double p = double(b - a) / double(acc.count);
                set_value(row, p / h);
                row.std_error = std::sqrt(p * (1.0 - p) / double(acc.count)) / h;
            }
            return;
        }
        case Quantity::OutageVsRate:
        case Quantity::OutageVsSnr: {
            switch (method) {
                case Method::LD: set_outage(row, ld_outage(ens, n, pc.r)); break;
                case Method::Gaussian: set_outage(row, gaussian_outage(ens, n, pc.r)); break;
                case Method::TRT:
                    set_outage(row, trt_outage(n, receive_count(ens, n), ens.rho, pc.r));
                    break;
                case Method::DMT: set_outage(row, dmt_outage(ens, n, pc.r)); break;
                case Method::MC:
                    set_outage(row, outage_from(*mc.info, n, receive_count(ens, n), ens.rho, pc.r));
                    break;
                case Method::LDCorrected: break;
            }
            return;
        }
        case Quantity::SergVsSnr: set_value(row, s_erg(ens)); return;
    }
}

}  // namespace detail

/// Evaluates every (grid point, method) pair; rows are ordered by grid index,
/// then by the order of `methods`, whatever the completion order of workers.
///
/// Solver failures do not abort the sweep: the row carries status "error: ...".
inline SweepResult run_sweep(const SweepSpec& s) {
    const auto diags = validate(s);
    if (!diags.empty()) throw DomainError("invalid sweep: " + diags.front());

    const auto grid = s.grid.values();
    // histogram bins end halfway to the neighbouring grid points
    std::vector<double> edges(grid.size() + 1);
    for (std::size_t i = 1; i < grid.size(); ++i) edges[i] = 0.5 * (grid[i - 1] + grid[i]);
    edges.front() = grid.front() - (edges[1] - grid.front());
    edges.back() = grid.back() + (grid.back() - edges[grid.size() - 1]);
    const bool with_mc = std::find(s.methods.begin(), s.methods.end(), Method::MC) != s.methods.end();
    const bool with_asymptote = s.quantity == Quantity::SergVsSnr;

    std::vector<detail::PointContext> ctx(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double db = is_snr_sweep(s.quantity) ? grid[i] : s.snr_db;
        auto& pc = ctx[i];
        pc.rho_db = db;
        pc.ch = normalize_ensemble(s.n_tx, s.n_rx, db_to_linear(db));
        if (s.quantity == Quantity::OutageVsSnr || is_spectrum_sweep(s.quantity)) {
            pc.r = detail::fixed_rate_nats(s, pc.ch.n);
        } else if (!is_snr_sweep(s.quantity)) {
            pc.r = detail::grid_rate_nats(s, grid[i], pc.ch.n);
        }
    }

    // One MC cache per distinct SNR; rate and spectrum sweeps share a single one.
    const std::size_t n_cache = is_snr_sweep(s.quantity) ? grid.size() : 1;
    std::vector<detail::McCache> caches(n_cache);

    const std::size_t per_point = s.methods.size() + (with_asymptote ? 1 : 0);
    SweepResult res;
    res.rows.resize(grid.size() * per_point);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> next_cache{0};
    auto mc_worker = [&] {
        for (std::size_t c = next_cache++; c < n_cache; c = next_cache++) {
            const auto& pc = ctx[c];
            auto cfg = detail::mc_config(s, pc.ch);
            try {
                if (is_spectrum_sweep(s.quantity)) {
                    caches[c].conditioned = conditioned_spectrum(cfg, pc.r);
                } else {
                    caches[c].info = simulate(cfg);
                }
            } catch (const std::exception& e) {
                caches[c].error = e.what();
            }
        }
    };
    auto worker = [&] {
        for (std::size_t t = next++; t < res.rows.size(); t = next++) {
            const std::size_t i = t / per_point;
            const std::size_t j = t % per_point;
            const auto& pc = ctx[i];
            Row& row = res.rows[t];
            row.n = pc.ch.n;
            row.m = receive_count(pc.ch.ensemble, pc.ch.n);
            row.rho_db = pc.rho_db;
            row.r = pc.r;
            row.x = grid[i];
            if (j == s.methods.size()) {
                row.method = "asymptote";
                detail::set_value(row, s_erg_asymptote(pc.ch.ensemble.beta, pc.ch.ensemble.rho));
                continue;
            }
            const Method m = s.methods[j];
            row.method = std::string(method_name(m));
            try {
                const auto& cache = caches[is_snr_sweep(s.quantity) ? i : 0];
                if (m == Method::MC && !cache.info && !cache.conditioned) {
                    throw InsufficientAcceptance(cache.error);
                }
                detail::evaluate(s, m, grid[i], edges[i], edges[i + 1], pc, cache, row);
            } catch (const std::exception& e) {
                row.value = row.log10_value = std::numeric_limits<double>::quiet_NaN();
                row.status = std::string("error: ") + e.what();
            }
        }
    };
    auto run_pool = [&](auto&& fn) {
        if (s.jobs <= 1) {
            fn();
            return;
        }
        std::vector<std::jthread> pool;
        for (int w = 0; w < s.jobs; ++w) pool.emplace_back(fn);
    };
    if (with_mc) run_pool(mc_worker);
    run_pool(worker);
    for (const auto& r : res.rows) res.failures += r.status == "ok" ? 0 : 1;
    return res;
}

// ---- serialization -------------------------------------------------------

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline constexpr const char* kCsvHeader =
    "method,n,m,rho_db,r_nats_per_antenna,R_bits_total,x,value,log10_value,stderr,status";

inline void write_csv(std::ostream& os, const SweepResult& res) {
    os << kCsvHeader << '\n';
    for (const auto& r : res.rows) {
        os << csv_quote(r.method) << ',' << r.n << ',' << r.m << ',' << format_number(r.rho_db) << ','
           << format_number(r.r) << ',' << format_number(r.r_bits_total()) << ',' << format_number(r.x) << ','
           << format_number(r.value) << ',' << format_number(r.log10_value) << ','
           << format_number(r.std_error) << ',' << csv_quote(r.status) << '\n';
    }
}

// JSON has no NaN or infinity; those become null.
inline nlohmann::json json_number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return std::stod(format_number(v));
}

inline nlohmann::json to_json(const SweepSpec& s, const SweepResult& res) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : res.rows) {
        rows.push_back({{"method", r.method},
                        {"n", r.n},
                        {"m", r.m},
                        {"rho_db", json_number(r.rho_db)},
                        {"r_nats_per_antenna", json_number(r.r)},
                        {"R_bits_total", json_number(r.r_bits_total())},
                        {"x", json_number(r.x)},
                        {"value", json_number(r.value)},
                        {"log10_value", json_number(r.log10_value)},
                        {"stderr", json_number(r.std_error)},
                        {"status", r.status}});
    }
    return {{"quantity", std::string(quantity_name(s.quantity))}, {"failures", res.failures}, {"rows", rows}};
}

inline void write_json(std::ostream& os, const SweepSpec& s, const SweepResult& res) {
    os << to_json(s, res).dump(2) << '\n';
}

}  // namespace ldmimo
