// ldmimo: sweep, validate and simulate MIMO mutual-information distributions.
//
// Exit status: 0 success, 2 invalid configuration, 3 solver failure (the
// table is still written, failed rows carry an error status), 4 I/O error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ldmimo/sweep.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;
constexpr const char* kVersion = "ldmimo 0.1.0";

struct Options {
    std::string config;
    std::string quantity;
    int ntx = 0, nrx = 0;
    double snr_db = 0.0;
    double rate = 0.0;
    std::string rate_units;
    std::string grid;
    std::string methods;
    std::uint64_t trials = 0, seed = 0;
    int streams = 1, jobs = 1;
    std::string format = "csv";
    std::string out = "-";
    double s3 = 0.0;
};

struct Flags {
    CLI::Option *config, *quantity, *ntx, *nrx, *snr_db, *rate, *rate_units, *grid, *methods, *trials, *seed,
        *streams, *jobs, *format, *out, *s3;
};

Flags add_flags(CLI::App* app, Options& o) {
    Flags f{};
    f.config = app->add_option("--config", o.config, "JSON config file; flags override its values");
    f.quantity = app->add_option("--quantity", o.quantity,
                                 "density|cdf|exponent|pdf|outage-vs-rate|outage-vs-snr|serg-vs-snr");
    f.ntx = app->add_option("--ntx", o.ntx, "transmit antennas");
    f.nrx = app->add_option("--nrx", o.nrx, "receive antennas");
    f.snr_db = app->add_option("--snr-db", o.snr_db, "SNR in dB for rate and spectrum sweeps");
    f.rate = app->add_option("--rate", o.rate, "fixed rate for snr and spectrum sweeps");
    f.rate_units = app->add_option("--rate-units", o.rate_units, "nats-per-antenna|bits-total");
    f.grid = app->add_option("--grid", o.grid, "start:stop:points[:linear|log|db]");
    f.methods = app->add_option("--methods", o.methods, "comma list of ld,gaussian,trt,dmt,mc,ld-corrected");
    f.trials = app->add_option("--trials", o.trials, "Monte Carlo trials");
    f.seed = app->add_option("--seed", o.seed, "Monte Carlo seed");
    f.streams = app->add_option("--streams", o.streams, "independent Monte Carlo streams");
    f.jobs = app->add_option("--jobs", o.jobs, "worker threads");
    f.format = app->add_option("--format", o.format, "csv|json");
    f.out = app->add_option("--out", o.out, "output path, - for stdout");
    f.s3 = app->add_option("--s3", o.s3, "third cumulant for ld-corrected");
    return f;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

bool parse_double(const std::string& s, double& v) {
    try {
        std::size_t pos = 0;
        v = std::stod(s, &pos);
        return pos == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

void apply_methods(const std::string& text, ldmimo::SweepSpec& spec, std::vector<std::string>& errs) {
    spec.methods.clear();
    for (const auto& name : split(text, ',')) {
        if (auto m = ldmimo::parse_method(name)) {
            spec.methods.push_back(*m);
        } else {
            errs.push_back("unknown method '" + name + "'");
        }
    }
}

void apply_grid(const std::string& text, ldmimo::SweepSpec& spec, std::vector<std::string>& errs) {
    const auto parts = split(text, ':');
    if (parts.size() < 3 || parts.size() > 4) {
        errs.push_back("grid must look like start:stop:points[:scale]");
        return;
    }
    double pts = 0.0;
    if (!parse_double(parts[0], spec.grid.start) || !parse_double(parts[1], spec.grid.stop) ||
        !parse_double(parts[2], pts) || pts != std::floor(pts)) {
        errs.push_back("grid values must be numbers with an integer point count");
        return;
    }
    spec.grid.points = static_cast<int>(pts);
    if (parts.size() == 4) {
        if (auto sc = ldmimo::parse_scale(parts[3])) {
            spec.grid.scale = *sc;
        } else {
            errs.push_back("unknown grid scale '" + parts[3] + "'");
        }
    }
}

void apply_quantity(const std::string& q, ldmimo::SweepSpec& spec, std::vector<std::string>& errs) {
    if (auto v = ldmimo::parse_quantity(q)) {
        spec.quantity = *v;
    } else {
        errs.push_back("unknown quantity '" + q + "'");
    }
}

void apply_units(const std::string& u, ldmimo::SweepSpec& spec, std::vector<std::string>& errs) {
    if (auto v = ldmimo::parse_units(u)) {
        spec.units = *v;
    } else {
        errs.push_back("unknown rate units '" + u + "'");
    }
}

ldmimo::McSettings& mc_of(ldmimo::SweepSpec& spec) {
    if (!spec.mc) spec.mc = ldmimo::McSettings{};
    return *spec.mc;
}

// Config file keys mirror the long flag names with '-' replaced by '_'.
void apply_config(const nlohmann::json& j, ldmimo::SweepSpec& spec, Options& o, std::vector<std::string>& errs) {
    try {
        if (j.contains("quantity")) apply_quantity(j["quantity"].get<std::string>(), spec, errs);
        if (j.contains("ntx")) spec.n_tx = j["ntx"].get<int>();
        if (j.contains("nrx")) spec.n_rx = j["nrx"].get<int>();
        if (j.contains("snr_db")) spec.snr_db = j["snr_db"].get<double>();
        if (j.contains("rate")) spec.rate = j["rate"].get<double>();
        if (j.contains("rate_units")) apply_units(j["rate_units"].get<std::string>(), spec, errs);
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            if (g.is_string()) {
                apply_grid(g.get<std::string>(), spec, errs);
            } else {
                spec.grid.start = g.at("start").get<double>();
                spec.grid.stop = g.at("stop").get<double>();
                spec.grid.points = g.at("points").get<int>();
                if (g.contains("scale")) {
                    if (auto sc = ldmimo::parse_scale(g["scale"].get<std::string>())) {
                        spec.grid.scale = *sc;
                    } else {
                        errs.push_back("unknown grid scale in config");
                    }
                }
            }
        }
        if (j.contains("methods")) {
            const auto& m = j["methods"];
            if (m.is_string()) {
                apply_methods(m.get<std::string>(), spec, errs);
            } else {
                std::string joined;
                for (const auto& x : m) joined += (joined.empty() ? "" : ",") + x.get<std::string>();
                apply_methods(joined, spec, errs);
            }
        }
        if (j.contains("trials")) mc_of(spec).trials = j["trials"].get<std::uint64_t>();
        if (j.contains("seed")) mc_of(spec).seed = j["seed"].get<std::uint64_t>();
        if (j.contains("streams")) mc_of(spec).streams = j["streams"].get<int>();
        if (j.contains("jobs")) spec.jobs = j["jobs"].get<int>();
        if (j.contains("s3")) spec.s3 = j["s3"].get<double>();
        if (j.contains("format")) o.format = j["format"].get<std::string>();
        if (j.contains("out")) o.out = j["out"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        errs.push_back(std::string("config: ") + e.what());
    }
}

// Builds the sweep from the config file (if any) and then the given flags.
ldmimo::SweepSpec build_spec(const Flags& f, Options& o, std::vector<std::string>& errs) {
    ldmimo::SweepSpec spec;
    if (*f.config) {
        std::ifstream in(o.config);
        if (!in) {
            errs.push_back("cannot read config file '" + o.config + "'");
            return spec;
        }
        try {
            apply_config(nlohmann::json::parse(in), spec, o, errs);
        } catch (const nlohmann::json::exception& e) {
            errs.push_back(std::string("config is not valid JSON: ") + e.what());
        }
    }
    if (*f.quantity) apply_quantity(o.quantity, spec, errs);
    if (*f.ntx) spec.n_tx = o.ntx;
    if (*f.nrx) spec.n_rx = o.nrx;
    if (*f.snr_db) spec.snr_db = o.snr_db;
    if (*f.rate) spec.rate = o.rate;
    if (*f.rate_units) apply_units(o.rate_units, spec, errs);
    if (*f.grid) apply_grid(o.grid, spec, errs);
    if (*f.methods) apply_methods(o.methods, spec, errs);
    if (*f.trials) mc_of(spec).trials = o.trials;
    if (*f.seed) mc_of(spec).seed = o.seed;
    if (*f.streams) mc_of(spec).streams = o.streams;
    if (*f.jobs) spec.jobs = o.jobs;
    if (*f.s3) spec.s3 = o.s3;
    if (o.format != "csv" && o.format != "json") errs.push_back("format must be csv or json");
    return spec;
}

int report(const std::vector<std::string>& diags) {
    for (const auto& d : diags) std::cerr << "error: " << d << '\n';
    return diags.empty() ? 0 : kExitConfig;
}

int run_and_write(const ldmimo::SweepSpec& spec, const Options& o) {
    ldmimo::SweepResult res;
    try {
        res = ldmimo::run_sweep(spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    }
    std::ostringstream buf;
    if (o.format == "json") {
        ldmimo::write_json(buf, spec, res);
    } else {
        ldmimo::write_csv(buf, res);
    }
    if (o.out == "-") {
        std::cout << buf.str();
        std::cout.flush();
        if (!std::cout) return kExitIo;
    } else {
        std::ofstream file(o.out, std::ios::binary);
        if (!file) {
            std::cerr << "error: cannot open '" << o.out << "' for writing\n";
            return kExitIo;
        }
        file << buf.str();
        file.close();
        if (!file) {
            std::cerr << "error: write to '" << o.out << "' failed\n";
            return kExitIo;
        }
    }
    if (res.failures > 0) {
        std::cerr << "error: " << res.failures << " row(s) failed; see the status column\n";
        return kExitSolver;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Large-deviations outage analysis for MIMO channels"};
    app.require_subcommand(1);

    Options sweep_opts, validate_opts, mc_opts;
    auto* sweep = app.add_subcommand("sweep", "evaluate a quantity over a grid and write a table");
    const Flags sweep_flags = add_flags(sweep, sweep_opts);
    auto* validate = app.add_subcommand("validate", "check a sweep configuration and list every problem");
    const Flags validate_flags = add_flags(validate, validate_opts);
    auto* mc = app.add_subcommand("mc", "Monte Carlo outage over a rate grid");
    const Flags mc_flags = add_flags(mc, mc_opts);
    app.add_subcommand("version", "print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (app.got_subcommand("version")) {
        std::cout << kVersion << '\n';
        return 0;
    }

    std::vector<std::string> errs;
    if (app.got_subcommand("validate")) {
        auto spec = build_spec(validate_flags, validate_opts, errs);
        auto diags = ldmimo::validate(spec);
        errs.insert(errs.end(), diags.begin(), diags.end());
        if (errs.empty()) std::cout << "ok\n";
        return report(errs);
    }

    const bool is_mc = app.got_subcommand("mc");
    Options& o = is_mc ? mc_opts : sweep_opts;
    auto spec = build_spec(is_mc ? mc_flags : sweep_flags, o, errs);
    if (is_mc) {
        spec.quantity = ldmimo::Quantity::OutageVsRate;
        spec.methods = {ldmimo::Method::MC};
    }
    auto diags = ldmimo::validate(spec);
    errs.insert(errs.end(), diags.begin(), diags.end());
    if (!errs.empty()) return report(errs);
    return run_and_write(spec, o);
}
