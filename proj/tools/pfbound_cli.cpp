// pfbound: convergence studies and bound tables from the command line.

#include "pfbound/error.hpp"
#include "pfbound/experiments.hpp"
#include "pfbound/kle.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <string>

namespace {

using namespace pfbound;

// Exit codes.
constexpr int kUsage = 2;
int stage_exit_code(const std::string& stage) {
    if (stage == "config") return 3;
    if (stage == "reference") return 4;
    if (stage == "lsf") return 5;
    if (stage == "estimate") return 6;
    if (stage == "form") return 7;
    if (stage == "bounds") return 8;
    if (stage == "output") return 9;
    return 1;
}

struct LevelRange {
    int lo;
    int hi;
};

/// "a..b" or a single level "a".
std::optional<LevelRange> parse_levels(const std::string& s) {
    static const std::regex re(R"(^\s*(\d+)\s*(?:\.\.\s*(\d+)\s*)?$)");
    std::smatch m;
    if (!std::regex_match(s, m, re)) return std::nullopt;
    const int lo = std::stoi(m[1].str());
    const int hi = m[2].matched ? std::stoi(m[2].str()) : lo;
    return LevelRange{lo, hi};
}

struct Options {
    std::string levels;
    std::string scheme = "euler";
    int degree = 1;
    int dim = 10;
    std::size_t samples = 10000;
    std::size_t replicates = 100;
    double target_cov = 0.25;
    std::uint64_t seed = 1;
    int reference_level = 12;
    std::optional<double> lambda;
    unsigned threads = 0;
    std::size_t tail = 5;
    std::string out;
    std::string format = "csv";
};

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

RunConfig make_config(const Options& o, ExperimentKind kind, LevelRange defaults) {
    RunConfig c;
    c.experiment = kind;
    LevelRange lr = defaults;
    if (!o.levels.empty()) {
        const auto parsed = parse_levels(o.levels);
        if (!parsed) throw UsageError("--levels expects a..b, got '" + o.levels + "'");
        lr = *parsed;
    }
    c.level_min = lr.lo;
    c.level_max = lr.hi;
    if (o.scheme == "euler") {
        c.scheme = OdeKind::explicit_euler;
    } else if (o.scheme == "crank-nicolson" || o.scheme == "cn") {
        c.scheme = OdeKind::crank_nicolson;
    } else {
        throw UsageError("--scheme expects euler or crank-nicolson");
    }
    c.degree = o.degree;
    c.samples = o.samples;
    c.replicates = o.replicates;
    c.target_cov = o.target_cov;
    c.seed = o.seed;
    c.reference_level = o.reference_level;
    c.correlation_length = o.lambda;
    c.threads = o.threads;
    c.tail = o.tail;
    c.out = o.out;
    c.format = o.format == "json" ? ReportFormat::json : ReportFormat::csv;
    return c;
}

int run_study(const RunConfig& config) {
    try {
        config.validate();
    } catch (const Error& e) {
        throw ExperimentError("config", -1, e.what());
    }
    // Without --out the report goes to stdout: CSV rows stream as levels finish.
    const bool to_stdout = config.out.empty();
    const bool csv = config.format == ReportFormat::csv;
    if (to_stdout && csv) std::cout << csv_header << '\n' << std::flush;
    RowCallback echo;
    if (to_stdout && csv) echo = [](const ConvergenceRow& r) { write_csv_row(std::cout, r), std::cout.flush(); };
    const ConvergenceTable table = run_experiment(config, echo);
    if (to_stdout && !csv) write_json(std::cout, table, config);
    std::cerr << table.experiment << ": p_f " << format_number(table.p_f) << ", p_form " << format_number(table.p_form)
              << ", orders rel_err " << format_number(table.s_est) << ", rel_err_form "
              << format_number(table.s_est_form) << ", bound_abs " << format_number(table.s_est_bound) << '\n';
    return 0;
}

template <class F>
int with_output(const std::string& path, F&& write) {
    if (path.empty()) {
        write(std::cout);
        return 0;
    }
    std::ofstream file(path, std::ios::out | std::ios::trunc);
    if (!file) throw ExperimentError("output", -1, "cannot open " + path);
    write(file);
    file.flush();
    if (!file) throw ExperimentError("output", -1, "write failed: " + path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Failure-probability discretization studies and error-bound tables"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--levels", o.levels, "Level range a..b (h = 2^-level)");
        sub->add_option("--out", o.out, "Output file (default: stdout)");
        sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--tail", o.tail, "Finest levels used by the order fits")->check(CLI::PositiveNumber);
    };

    auto* ode = app.add_subcommand("ode-experiment", "Scalar ODE with explicit Euler / Crank-Nicolson");
    add_common(ode);
    ode->add_option("--scheme", o.scheme, "euler | crank-nicolson");

    auto* bvp = app.add_subcommand("bvp2d-experiment", "Two-parameter boundary value problem, FE degree 1 or 2");
    add_common(bvp);
    bvp->add_option("--degree", o.degree, "FE degree")->check(CLI::IsMember({1, 2}));

    auto* hd = app.add_subcommand("highdim-experiment", "Random diffusion coefficient, KLE with 10 or 50 terms");
    add_common(hd);
    hd->add_option("--dim", o.dim, "KLE terms")->check(CLI::IsMember({10, 50}));
    hd->add_option("--samples", o.samples, "SIS samples per step")->check(CLI::PositiveNumber);
    hd->add_option("--replicates", o.replicates, "Independent SIS runs per level")->check(CLI::PositiveNumber);
    hd->add_option("--target-cov", o.target_cov, "SIS target coefficient of variation")->check(CLI::PositiveNumber);
    hd->add_option("--seed", o.seed, "Base seed");
    hd->add_option("--reference-level", o.reference_level, "Level of the reference solution");
    hd->add_option("--lambda", o.lambda, "Override the correlation length")->check(CLI::PositiveNumber);
    hd->add_option("--threads", o.threads, "Worker threads for replicates (0 = all cores)");

    std::string table_out;
    auto* bt = app.add_subcommand("bounds-table", "Grids of the bound constants as CSV");
    bt->add_option("--out", table_out, "Output file (default: stdout)");

    int kle_dim = 10;
    double kle_lambda = 0.3;
    std::string kle_out;
    auto* ki = app.add_subcommand("kle-info", "KLE eigenvalues and captured variance as CSV");
    ki->add_option("--dim", kle_dim, "Number of terms")->check(CLI::PositiveNumber);
    ki->add_option("--lambda", kle_lambda, "Correlation length")->check(CLI::PositiveNumber);
    ki->add_option("--out", kle_out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*ode) return run_study(make_config(o, ExperimentKind::ode, {0, 9}));
        if (*bvp) return run_study(make_config(o, ExperimentKind::bvp2d, {1, 9}));
        if (*hd) {
            const auto kind = o.dim == 50 ? ExperimentKind::highdim50 : ExperimentKind::highdim10;
            return run_study(make_config(o, kind, {1, 11}));
        }
        if (*bt) return with_output(table_out, [](std::ostream& os) { write_bounds_table(os); });
        if (*ki) {
            const ExpCovKle kle = build_kle(0.1, 0.2, kle_lambda, static_cast<std::size_t>(kle_dim));
            return with_output(kle_out, [&](std::ostream& os) { write_kle_info(os, kle); });
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const ExperimentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return stage_exit_code(e.stage());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kUsage;
}
