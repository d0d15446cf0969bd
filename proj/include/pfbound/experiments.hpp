#pragma once

// Convergence studies over mesh/step levels h = 2^-level: reference values,
// per-level estimates, FORM, error bounds, fitted orders and report files.

#include "pfbound/error.hpp"
#include "pfbound/kle.hpp"
#include "pfbound/ode.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pfbound {

enum class ExperimentKind { ode, bvp2d, highdim10, highdim50 };
enum class ReportFormat { csv, json };

[[nodiscard]] std::string_view experiment_name(ExperimentKind kind) noexcept;

/// Fixed parameters of the high-dimensional diffusion problem.
struct HighdimSetup {
    std::size_t dim;
    double correlation_length;
    double q_max;
    double mean = 0.1;
    double stddev = 0.2;
};

/// n = 10: λ = 0.3, q_max = 1.7.  n = 50: λ = 0.1, q_max = 1.5.
[[nodiscard]] HighdimSetup highdim_setup(ExperimentKind kind);

struct RunConfig {
    ExperimentKind experiment = ExperimentKind::ode;
    OdeKind scheme = OdeKind::explicit_euler;  ///< ode only
    int degree = 1;                            ///< bvp2d only
    int level_min = 0;
    int level_max = 9;
    // sampling (highdim)
    std::size_t samples = 10000;
    double target_cov = 0.25;
    std::size_t replicates = 100;
    std::optional<std::uint64_t> seed;
    int reference_level = 12;
    std::optional<double> correlation_length;  ///< overrides the preset λ
    unsigned threads = 0;                      ///< 0 = hardware concurrency
    // reporting
    std::size_t tail = 5;  ///< finest levels used by the order fits
    std::string out;       ///< empty: no file
    ReportFormat format = ReportFormat::csv;

    /// Throws DomainError on an empty level range, bad degree, missing seed
    /// for a sampling experiment, or non-positive sampling settings.
    void validate() const;
};

struct ConvergenceRow {
    int level;
    double h;
    double p_fh;
    double p_form_h;
    double rel_err;
    double rel_err_form;
    double bound_abs;      ///< NaN where the bound is undefined at this h
    double replicate_std;  ///< 0 for deterministic estimators
    double mlfp_distance;  ///< ‖u*_h - u*‖
};

struct ConvergenceTable {
    std::string experiment;
    std::vector<ConvergenceRow> rows;
    double p_f;     ///< reference probability
    double p_f_std; ///< replicate std of the reference (0 if deterministic)
    double p_form;  ///< reference FORM probability
    // fitted orders; NaN if a fit had fewer than two usable points
    double s_est;
    double s_est_form;
    double s_est_bound;
    double s_est_mlfp;
};

/// Error raised by run_experiment: wraps the module error with the stage
/// ("config", "reference", "lsf", "estimate", "form", "bounds", "output")
/// and the level (-1 outside the level loop).
class ExperimentError : public Error {
public:
    ExperimentError(std::string stage, int level, const std::string& what);
    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }
    [[nodiscard]] int level() const noexcept { return level_; }

private:
    std::string stage_;
    int level_;
};

using RowCallback = std::function<void(const ConvergenceRow&)>;

/// Runs the study level by level (coarse to fine). If config.out is set the
/// report is written there; CSV rows are flushed as they complete.
/// `on_row` (optional) observes each finished row.
[[nodiscard]] ConvergenceTable run_experiment(const RunConfig& config, const RowCallback& on_row = {});

/// Least-squares slope of log(err) against log(h) over the `tail` smallest
/// h. Non-finite or non-positive errors are skipped; throws FitError if
/// fewer than two points remain.
[[nodiscard]] double fit_order(const std::vector<double>& hs, const std::vector<double>& errs, std::size_t tail = 5);

// ------------------------------------------------------------- reports

inline constexpr std::string_view csv_header = "level,h,p_fh,p_form_h,rel_err,rel_err_form,bound_abs,replicate_std";

/// Shortest round-trip decimal form ("nan", "inf" for non-finite values).
[[nodiscard]] std::string format_number(double v);

void write_csv_row(std::ostream& os, const ConvergenceRow& row);
void write_csv(std::ostream& os, const ConvergenceTable& table);
/// Rows (including mlfp_distance), reference values, fitted orders and the config.
void write_json(std::ostream& os, const ConvergenceTable& table, const RunConfig& config);

inline constexpr std::string_view bounds_table_header = "table,sigma2,beta,p_f,h,s,c_fe,n,value";

/// Grids of the bound constants, one CSV line per value:
///   c21, c21_sharp  σ² ∈ {0.1, 1, 10}, P_f = Φ(-β/σ) log-spaced in [1e-10, 0.5], C_FE = 1
///   c22             β = 4, σ = 1, s ∈ {1, 2}, C_FE ∈ {0.1, 1, 10}, h log-spaced in [1e-4, 1];
///                   value is c22/C_FE, rows with h beyond the validity threshold omitted
///   c4              n log-spaced in [1, 1e4]
/// Unused columns are empty.
void write_bounds_table(std::ostream& os);

inline constexpr std::string_view kle_info_header = "m,nu,cumulative";

/// One line per mode: index m (1-based), ν_m and Σ_{k<=m} ν_k.
void write_kle_info(std::ostream& os, const ExpCovKle& kle);

}  // namespace pfbound
