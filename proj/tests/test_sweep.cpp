#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "ldmimo/sweep.hpp"

using namespace ldmimo;

namespace {

bool mentions(const std::vector<std::string>& diags, const std::string& needle) {
    return std::any_of(diags.begin(), diags.end(),
                       [&](const std::string& d) { return d.find(needle) != std::string::npos; });
}

SweepSpec small_outage_spec() {
    SweepSpec s;
    s.quantity = Quantity::OutageVsRate;
    s.methods = {Method::LD, Method::Gaussian, Method::MC};
    s.grid = {1.0, 4.0, 4, GridScale::Linear};
    s.n_tx = 2;
    s.n_rx = 2;
    s.snr_db = 10.0;
    s.mc = McSettings{4000, 7, 2};
    return s;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

TEST(Validate, AcceptsWellFormedSpec) { EXPECT_TRUE(validate(small_outage_spec()).empty()); }

TEST(Validate, McWithoutTrials) {
    auto s = small_outage_spec();
    s.mc.reset();
    EXPECT_TRUE(mentions(validate(s), "mc settings required"));
    s = small_outage_spec();
    s.methods = {Method::LD};
    EXPECT_TRUE(mentions(validate(s), "method mc not requested"));
}

TEST(Validate, SinglePointGrid) {
    auto s = small_outage_spec();
    s.grid.points = 1;
    EXPECT_TRUE(mentions(validate(s), "at least 2 points"));
}

TEST(Validate, TrtAtNonPositiveLogSnr) {
    auto s = small_outage_spec();
    s.methods = {Method::TRT};
    s.mc.reset();
    s.snr_db = 0.0;
    EXPECT_TRUE(mentions(validate(s), "log2(rho) > 0"));
    s.snr_db = 3.0;
    EXPECT_TRUE(validate(s).empty());

    s.quantity = Quantity::OutageVsSnr;
    s.rate = 1.0;
    s.methods = {Method::DMT};
    s.grid = {-5.0, 20.0, 6, GridScale::Db};
    EXPECT_TRUE(mentions(validate(s), "log2(rho) > 0"));
}

TEST(Validate, UnsupportedAndMissingInputs) {
    SweepSpec s;
    s.quantity = Quantity::SergVsSnr;
    s.methods = {Method::Gaussian};
    s.grid = {0.0, 30.0, 4, GridScale::Db};
    EXPECT_TRUE(mentions(validate(s), "not available"));

    s = SweepSpec{};
    s.quantity = Quantity::OutageVsSnr;
    s.grid = {0.0, 30.0, 4, GridScale::Db};
    EXPECT_TRUE(mentions(validate(s), "needs a fixed rate"));

    s = SweepSpec{};
    s.quantity = Quantity::Pdf;
    s.methods = {Method::LDCorrected};
    s.grid = {1.0, 2.0, 3, GridScale::Linear};
    EXPECT_TRUE(mentions(validate(s), "s3 required"));
    s.s3 = 0.1;
    EXPECT_TRUE(validate(s).empty());
}

TEST(Units, RoundTrip) {
    for (int n : {1, 3, 16}) {
        for (double r : {1e-6, 0.3, 5.0014, 123.0}) {
            EXPECT_NEAR(to_nats_per_antenna(to_bits_total(r, n), n), r, 1e-12 * r);
        }
    }
    EXPECT_NEAR(to_bits_total(std::log(2.0), 4), 4.0, 1e-15);
    for (double db : {-10.0, 0.0, 17.3}) EXPECT_NEAR(linear_to_db(db_to_linear(db)), db, 1e-12);
}

TEST(Grid, EndpointsAndSpacing) {
    const auto lin = Grid{1.0, 3.0, 5, GridScale::Linear}.values();
    EXPECT_EQ(lin, (std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0}));
    const auto lg = Grid{0.01, 100.0, 5, GridScale::Log}.values();
    EXPECT_DOUBLE_EQ(lg.front(), 0.01);
    EXPECT_DOUBLE_EQ(lg.back(), 100.0);
    EXPECT_NEAR(lg[2], 1.0, 1e-14);
}

TEST(Serialization, FormatsNonFiniteValues) {
    EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_EQ(format_number(0.25), "0.25");
    EXPECT_TRUE(json_number(std::numeric_limits<double>::infinity()).is_null());
}

TEST(RunSweep, CsvSchemaAndRowCount) {
    const auto s = small_outage_spec();
    const auto res = run_sweep(s);
    EXPECT_EQ(res.failures, 0);
    ASSERT_EQ(res.rows.size(), 12u);
    std::ostringstream os;
    write_csv(os, res);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, kCsvHeader);
    const auto ncols = split(kCsvHeader).size();
    int rows = 0;
    while (std::getline(in, line)) {
        const auto cells = split(line);
        ASSERT_EQ(cells.size(), ncols) << line;
        EXPECT_EQ(cells.back(), "ok");
        ++rows;
    }
    EXPECT_EQ(rows, 12);
    for (const auto& r : res.rows) {
        EXPECT_EQ(r.n, 2);
        EXPECT_EQ(r.m, 2);
        EXPECT_DOUBLE_EQ(r.rho_db, 10.0);
        EXPECT_GE(r.value, 0.0);
        EXPECT_LE(r.value, 1.0);
        if (r.method == "mc") {
            EXPECT_TRUE(std::isfinite(r.std_error));
        }
    }
}

TEST(RunSweep, JsonSchema) {
    const auto s = small_outage_spec();
    const auto j = to_json(s, run_sweep(s));
    EXPECT_EQ(j.at("quantity"), "outage-vs-rate");
    EXPECT_EQ(j.at("failures"), 0);
    ASSERT_EQ(j.at("rows").size(), 12u);
    for (const auto& row : j.at("rows")) {
        for (const char* key : {"method", "n", "m", "rho_db", "r_nats_per_antenna", "R_bits_total", "x", "value",
                                "log10_value", "stderr", "status"}) {
            EXPECT_TRUE(row.contains(key)) << key;
        }
    }
}

TEST(RunSweep, DeterministicAcrossRunsAndJobs) {
    auto s = small_outage_spec();
    std::ostringstream a, b;
    write_csv(a, run_sweep(s));
    s.jobs = 4;
    write_csv(b, run_sweep(s));
    EXPECT_EQ(a.str(), b.str());
}

TEST(RunSweep, BitsTotalGridMatchesNatsGrid) {
    auto nats = small_outage_spec();
    nats.methods = {Method::LD};
    nats.mc.reset();
    auto bits = nats;
    bits.units = RateUnits::BitsTotal;
    bits.grid.start = to_bits_total(nats.grid.start, 2);
    bits.grid.stop = to_bits_total(nats.grid.stop, 2);
    const auto rn = run_sweep(nats), rb = run_sweep(bits);
    ASSERT_EQ(rn.rows.size(), rb.rows.size());
    for (std::size_t i = 0; i < rn.rows.size(); ++i) {
        EXPECT_NEAR(rn.rows[i].r, rb.rows[i].r, 1e-12 * rn.rows[i].r);
        EXPECT_NEAR(rn.rows[i].value, rb.rows[i].value, 1e-9 * rn.rows[i].value + 1e-300);
    }
}

TEST(RunSweep, PointErrorsAreReportedInStatus) {
    SweepSpec s;
    s.quantity = Quantity::Pdf;
    s.methods = {Method::LDCorrected};
    s.grid = {4.0, 6.0, 3, GridScale::Linear};
    s.n_tx = 2;
    s.n_rx = 4;
    s.snr_db = 20.0;
    s.s3 = 50.0;
    const auto res = run_sweep(s);
    EXPECT_EQ(res.failures, 3);
    for (const auto& r : res.rows) EXPECT_EQ(r.status.rfind("error: ", 0), 0u) << r.status;
}
