#include "pfbound/error.hpp"
#include "pfbound/experiments.hpp"
#include "pfbound/kle.hpp"

#include "doctest.h"
#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace pfbound;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("pfbound_test_" + name);
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

RunConfig small_highdim() {
    RunConfig c;
    c.experiment = ExperimentKind::highdim10;
    c.level_min = 2;
    c.level_max = 4;
    c.reference_level = 6;
    c.samples = 1000;
    c.replicates = 3;
    c.seed = 17;
    c.threads = 1;
    c.tail = 3;
    return c;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("fit_order") {
    std::vector<double> hs, e1, e2;
    for (int l = 1; l <= 8; ++l) {
        const double h = std::ldexp(1.0, -l);
        hs.push_back(h);
        e1.push_back(3.0 * h);
        e2.push_back(0.5 * h * h);
    }
    CHECK(std::abs(fit_order(hs, e1) - 1.0) <= 1e-10);
    CHECK(std::abs(fit_order(hs, e2) - 2.0) <= 1e-10);
    CHECK(std::abs(fit_order(hs, e2, 2) - 2.0) <= 1e-10);
    // the window is the finest levels regardless of input order
    std::vector<double> rh(hs.rbegin(), hs.rend()), re(e1.rbegin(), e1.rend());
    re.back() = 1e3;  // coarsest, outside the window
    CHECK(std::abs(fit_order(rh, re, 5) - 1.0) <= 1e-10);
    // non-finite and non-positive points are skipped
    std::vector<double> holes = e2;
    holes[7] = std::nan("");
    holes[6] = 0.0;
    CHECK(std::abs(fit_order(hs, holes, 5) - 2.0) <= 1e-10);
    CHECK_THROWS_AS((void)fit_order({0.5}, {0.1}), FitError);
    CHECK_THROWS_AS((void)fit_order({0.5, 0.25}, {0.1, std::nan("")}), FitError);
    CHECK_THROWS_AS((void)fit_order({0.5, 0.25}, {0.1}), DomainError);
}

TEST_CASE("format_number") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1e-300) == "1e-300");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(INFINITY) == "inf");
    CHECK(format_number(-INFINITY) == "-inf");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("ODE study: columns, determinism, orders") {
    RunConfig c;
    c.experiment = ExperimentKind::ode;
    c.level_max = 9;
    c.out = scratch("ode_a.csv").string();
    std::vector<int> seen;
    const ConvergenceTable t = run_experiment(c, [&](const ConvergenceRow& r) { seen.push_back(r.level); });
    CHECK(seen == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(t.experiment == "ode-euler");
    CHECK(t.s_est == doctest::Approx(1.0).epsilon(0.15));
    CHECK(t.s_est_form == doctest::Approx(1.0).epsilon(0.15));
    CHECK(t.s_est_bound == doctest::Approx(1.0).epsilon(0.15));
    CHECK(t.s_est_mlfp == doctest::Approx(1.0).epsilon(0.15));

    const std::string a = slurp(c.out);
    const auto lines = lines_of(a);
    REQUIRE(lines.size() == 11);
    CHECK(lines[0] == csv_header);
    CHECK(lines[1].rfind("0,1,", 0) == 0);
    for (const auto& row : t.rows) {
        CHECK(row.replicate_std == 0.0);
        CHECK(row.rel_err == doctest::Approx(std::abs(row.p_fh - t.p_f) / t.p_f));
        if (row.level >= 4) CHECK(row.bound_abs >= std::abs(row.p_fh - t.p_f));
    }
    c.out = scratch("ode_b.csv").string();
    (void)run_experiment(c);
    CHECK(slurp(c.out) == a);
}

TEST_CASE("bvp2d study: JSON report and FORM conservatism") {
    RunConfig c;
    c.experiment = ExperimentKind::bvp2d;
    c.degree = 2;
    c.level_min = 1;
    c.level_max = 7;
    c.format = ReportFormat::json;
    c.out = scratch("bvp.json").string();
    const ConvergenceTable t = run_experiment(c);
    const auto j = nlohmann::json::parse(slurp(c.out));
    CHECK(j["experiment"] == "bvp2d-p2");
    CHECK(j["rows"].size() == 7);
    CHECK(j["rows"][0].contains("mlfp_distance"));
    CHECK(j["config"]["levels"][1] == 7);
    CHECK(j["config"]["degree"] == 2);
    CHECK(j["reference"]["p_f"].get<double>() == t.p_f);
    CHECK(t.s_est == doctest::Approx(3.0).epsilon(0.15));
    for (const auto& row : t.rows) CHECK(row.p_form_h >= row.p_fh);
    for (const auto& r : j["rows"]) CHECK((r["bound_abs"].is_null() || r["bound_abs"].is_number()));
}

TEST_CASE("highdim study: small run") {
    RunConfig c = small_highdim();
    const ConvergenceTable t = run_experiment(c);
    CHECK(t.experiment == "highdim10");
    REQUIRE(t.rows.size() == 3);
    for (const auto& row : t.rows) {
        CHECK(row.replicate_std > 0.0);
        CHECK(std::isfinite(row.mlfp_distance));
        CHECK(row.p_fh > 0.0);
    }
    c.replicates = 1;
    for (const auto& row : run_experiment(c).rows) CHECK(row.replicate_std == 0.0);
}

TEST_CASE("errors carry their stage") {
    auto stage_of = [](const RunConfig& c) -> std::string {
        try {
            (void)run_experiment(c);
        } catch (const ExperimentError& e) {
            return e.stage();
        }
        return "none";
    };
    RunConfig c;
    c.level_min = 5;
    c.level_max = 4;
    CHECK(stage_of(c) == "config");
    c = RunConfig{};
    c.out = "/nonexistent-dir/x.csv";
    CHECK(stage_of(c) == "output");
    c = small_highdim();
    c.seed.reset();
    CHECK(stage_of(c) == "config");
    c = small_highdim();
    c.samples = 50;  // below the SIS minimum
    CHECK(stage_of(c) == "reference");
    c = small_highdim();
    c.reference_level = 3;
    CHECK(stage_of(c) == "config");

    const ExperimentError e("form", 7, "did not converge");
    CHECK(std::string(e.what()) == "level 7, stage form: did not converge");
    CHECK(e.level() == 7);
    CHECK(std::string(ExperimentError("reference", -1, "x").what()) == "stage reference: x");
}

TEST_CASE("bounds table") {
    std::ostringstream os;
    write_bounds_table(os);
    const auto lines = lines_of(os.str());
    REQUIRE(!lines.empty());
    CHECK(lines[0] == bounds_table_header);
    std::size_t c21 = 0, sharp = 0, c22 = 0, c4 = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string tag = lines[i].substr(0, lines[i].find(','));
        c21 += tag == "c21";
        sharp += tag == "c21_sharp";
        c22 += tag == "c22";
        c4 += tag == "c4";
        CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 8);
    }
    CHECK(c21 == 3 * 41);
    CHECK(sharp == 3 * 41);
    CHECK(c22 > 0);
    CHECK(c4 > 0);
    CHECK(c21 + sharp + c22 + c4 == lines.size() - 1);
}

TEST_CASE("kle info") {
    const ExpCovKle kle = build_kle(0.1, 0.2, 0.3, 10);
    std::ostringstream os;
    write_kle_info(os, kle);
    const auto lines = lines_of(os.str());
    REQUIRE(lines.size() == 11);
    CHECK(lines[0] == kle_info_header);
    double prev_nu = INFINITY, prev_cum = 0.0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::istringstream row(lines[i]);
        std::string m, nu, cum;
        std::getline(row, m, ',');
        std::getline(row, nu, ',');
        std::getline(row, cum, ',');
        CHECK(std::stoi(m) == static_cast<int>(i));
        CHECK(std::stod(nu) < prev_nu);
        CHECK(std::stod(cum) == doctest::Approx(prev_cum + std::stod(nu)));
        prev_nu = std::stod(nu);
        prev_cum = std::stod(cum);
    }
    CHECK(prev_cum < 1.0);  // eigenvalues of the unit-variance correlation kernel
}

}  // TEST_SUITE
