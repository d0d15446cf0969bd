#include "pfbound/experiments.hpp"

#include "pfbound/bounds.hpp"
#include "pfbound/estimators.hpp"
#include "pfbound/form.hpp"
#include "pfbound/limit_state.hpp"
#include "pfbound/normal.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>
#include <set>

namespace pfbound {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Runs `f`, re-throwing any non-experiment error tagged with stage/level.
template <class F>
auto staged(const char* stage, int level, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ExperimentError&) {
        throw;
    } catch (const std::exception& e) {
        throw ExperimentError(stage, level, e.what());
    }
}

struct LevelEstimate {
    double p;
    double std;
};

/// Per-experiment wiring: exact/reference model, level models and estimators.
class Study {
public:
    virtual ~Study() = default;
    [[nodiscard]] virtual const LimitStateEvaluator& exact() const = 0;
    [[nodiscard]] virtual int dim() const = 0;
    [[nodiscard]] virtual LevelEstimate reference_probability() = 0;
    [[nodiscard]] virtual LimitStateEvaluator at_level(int level) const = 0;
    [[nodiscard]] virtual LevelEstimate estimate(int level, const LimitStateEvaluator& lsf) = 0;
};

class OdeStudy final : public Study {
public:
    explicit OdeStudy(OdeKind kind) : kind_(kind), exact_(make_ode_lsf(std::nullopt)) {}
    const LimitStateEvaluator& exact() const override { return exact_; }
    int dim() const override { return 1; }
    LevelEstimate reference_probability() override { return {quadrature_pf(OdeFamily{}).value, 0.0}; }
    LimitStateEvaluator at_level(int level) const override {
        return make_ode_lsf(OdeScheme::at_level(kind_, level));
    }
    LevelEstimate estimate(int level, const LimitStateEvaluator&) override {
        return {quadrature_pf(OdeFamily{OdeScheme::at_level(kind_, level)}).value, 0.0};
    }

private:
    OdeKind kind_;
    LimitStateEvaluator exact_;
};

class Bvp2dStudy final : public Study {
public:
    explicit Bvp2dStudy(int degree) : degree_(degree), exact_(make_bvp2d_lsf(std::nullopt)) {}
    const LimitStateEvaluator& exact() const override { return exact_; }
    int dim() const override { return 2; }
    LevelEstimate reference_probability() override { return {quadrature_pf(Bvp2dFamily{}).value, 0.0}; }
    LimitStateEvaluator at_level(int level) const override {
        return make_bvp2d_lsf(Bvp2dDiscretization{degree_, level});
    }
    LevelEstimate estimate(int level, const LimitStateEvaluator&) override {
        return {quadrature_pf(Bvp2dFamily{Bvp2dDiscretization{degree_, level}}).value, 0.0};
    }

private:
    int degree_;
    LimitStateEvaluator exact_;
};

/// Reference = the same model at the reference level. Every level reuses the
/// same replicate seeds (common random numbers).
class HighdimStudy final : public Study {
public:
    explicit HighdimStudy(const RunConfig& c)
        : setup_(highdim_setup(c.experiment)),
          kle_(std::make_shared<const ExpCovKle>(build_kle(setup_.mean, setup_.stddev,
                                                           c.correlation_length.value_or(setup_.correlation_length),
                                                           setup_.dim))),
          exact_(make_diffusion_lsf(kle_, setup_.q_max, c.reference_level)),
          replicates_(c.replicates),
          seed_(*c.seed),
          threads_(c.threads) {
        options_.samples = c.samples;
        options_.target_cov = c.target_cov;
    }
    const LimitStateEvaluator& exact() const override { return exact_; }
    int dim() const override { return static_cast<int>(setup_.dim); }
    LevelEstimate reference_probability() override {
        const auto s = sis_replicates(exact_, replicates_, seed_, options_, threads_);
        return {s.mean, replicates_ > 1 ? s.std : 0.0};
    }
    LimitStateEvaluator at_level(int level) const override {
        return make_diffusion_lsf(kle_, setup_.q_max, level);
    }
    LevelEstimate estimate(int, const LimitStateEvaluator& lsf) override {
        const auto s = sis_replicates(lsf, replicates_, seed_, options_, threads_);
        return {s.mean, replicates_ > 1 ? s.std : 0.0};
    }

private:
    HighdimSetup setup_;
    std::shared_ptr<const ExpCovKle> kle_;
    LimitStateEvaluator exact_;
    std::size_t replicates_;
    std::uint64_t seed_;
    unsigned threads_;
    SisOptions options_;
};

std::unique_ptr<Study> make_study(const RunConfig& c) {
    switch (c.experiment) {
        case ExperimentKind::ode: return std::make_unique<OdeStudy>(c.scheme);
        case ExperimentKind::bvp2d: return std::make_unique<Bvp2dStudy>(c.degree);
        case ExperimentKind::highdim10:
        case ExperimentKind::highdim50: return std::make_unique<HighdimStudy>(c);
    }
    throw DomainError("unknown experiment");
}

FormResult converged_form(const LimitStateEvaluator& lsf) {
    FormResult r = find_mlfp(lsf);
    if (!r.converged) throw ConvergenceError("FORM did not converge on " + lsf.name());
    return r;
}

double fit_or_nan(const std::vector<double>& hs, const std::vector<double>& errs, std::size_t tail) {
    try {
        return fit_order(hs, errs, tail);
    } catch (const FitError&) {
        return kNaN;
    }
}

std::string experiment_label(const RunConfig& c) {
    std::string id(experiment_name(c.experiment));
    if (c.experiment == ExperimentKind::ode) id += "-" + std::string(ode_kind_name(c.scheme));
    if (c.experiment == ExperimentKind::bvp2d) id += "-p" + std::to_string(c.degree);
    return id;
}

}  // namespace

std::string_view experiment_name(ExperimentKind kind) noexcept {
    switch (kind) {
        case ExperimentKind::ode: return "ode";
        case ExperimentKind::bvp2d: return "bvp2d";
        case ExperimentKind::highdim10: return "highdim10";
        case ExperimentKind::highdim50: return "highdim50";
    }
    return "unknown";
}

HighdimSetup highdim_setup(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::highdim10: return {10, 0.3, 1.7};
        case ExperimentKind::highdim50: return {50, 0.1, 1.5};
        default: throw DomainError("highdim_setup: not a high-dimensional experiment");
    }
}

void RunConfig::validate() const {
    if (level_min < 0 || level_max < level_min) throw DomainError("level range is empty");
    if (experiment == ExperimentKind::bvp2d && degree != 1 && degree != 2) throw DomainError("degree must be 1 or 2");
    if (tail < 2) throw DomainError("tail window needs at least 2 levels");
    const bool highdim = experiment == ExperimentKind::highdim10 || experiment == ExperimentKind::highdim50;
    if (highdim) {
        if (!seed) throw DomainError("sampling experiment needs a seed");
        if (samples < 2) throw DomainError("samples must be at least 2");
        if (replicates < 1) throw DomainError("replicates must be at least 1");
        if (!(target_cov > 0.0)) throw DomainError("target cov must be positive");
        if (reference_level < level_max) throw DomainError("reference level must not be coarser than the levels");
        if (correlation_length && !(*correlation_length > 0.0)) throw DomainError("correlation length must be positive");
    }
}

ExperimentError::ExperimentError(std::string stage, int level, const std::string& what)
    : Error((level >= 0 ? "level " + std::to_string(level) + ", " : std::string()) + "stage " + stage + ": " + what),
      stage_(std::move(stage)),
      level_(level) {}

ConvergenceTable run_experiment(const RunConfig& config, const RowCallback& on_row) {
    staged("config", -1, [&] { config.validate(); });

    std::ofstream file;
    if (!config.out.empty()) {
        file.open(config.out, std::ios::out | std::ios::trunc);
        if (!file) throw ExperimentError("output", -1, "cannot open " + config.out);
        if (config.format == ReportFormat::csv) file << csv_header << '\n' << std::flush;
    }

    auto study = staged("reference", -1, [&] { return make_study(config); });
    ConvergenceTable table{experiment_label(config), {}, 0.0, 0.0, 0.0, kNaN, kNaN, kNaN, kNaN};
    const LevelEstimate reference = staged("reference", -1, [&] { return study->reference_probability(); });
    table.p_f = reference.p;
    table.p_f_std = reference.std;
    const FormResult form_exact = staged("reference", -1, [&] { return converged_form(study->exact()); });
    table.p_form = form_exact.p_form;

    for (int level = config.level_min; level <= config.level_max; ++level) {
        const LimitStateEvaluator lsf = staged("lsf", level, [&] { return study->at_level(level); });
        const LevelEstimate est = staged("estimate", level, [&] { return study->estimate(level, lsf); });
        const FormResult form_h = staged("form", level, [&] { return converged_form(lsf); });

        const double bound = staged("bounds", level, [&] {
            const std::vector<ParameterVector> surface{form_h.mlfp, form_exact.mlfp};
            const C3Estimate c3 = estimate_c3(study->exact(), lsf, surface);
            const DiscretizationSpec spec(*lsf.tag().h, lsf.tag().s, c3.c_fe);
            try {
                return assemble_bounds(form_h, spec, c3.c3, study->dim(), form_exact.beta).bound_abs;
            } catch (const BoundValidityError&) {
                return kNaN;  // h above the validity threshold
            }
        });

        ConvergenceRow row{level,
                           std::ldexp(1.0, -level),
                           est.p,
                           form_h.p_form,
                           std::abs(table.p_f - est.p) / table.p_f,
                           std::abs(table.p_form - form_h.p_form) / table.p_form,
                           bound,
                           est.std,
                           mlfp_distance(form_h, form_exact)};
        table.rows.push_back(row);
        if (file.is_open() && config.format == ReportFormat::csv) {
            write_csv_row(file, row);
            file.flush();
            if (!file) throw ExperimentError("output", level, "write failed: " + config.out);
        }
        if (on_row) on_row(row);
    }

    std::vector<double> hs, e, ef, eb, em;
    for (const auto& r : table.rows) {
        hs.push_back(r.h);
        e.push_back(r.rel_err);
        ef.push_back(r.rel_err_form);
        eb.push_back(r.bound_abs);
        em.push_back(r.mlfp_distance);
    }
    table.s_est = fit_or_nan(hs, e, config.tail);
    table.s_est_form = fit_or_nan(hs, ef, config.tail);
    table.s_est_bound = fit_or_nan(hs, eb, config.tail);
    table.s_est_mlfp = fit_or_nan(hs, em, config.tail);

    if (file.is_open() && config.format == ReportFormat::json) {
        write_json(file, table, config);
        file.flush();
        if (!file) throw ExperimentError("output", -1, "write failed: " + config.out);
    }
    return table;
}

double fit_order(const std::vector<double>& hs, const std::vector<double>& errs, std::size_t tail) {
    if (hs.size() != errs.size()) throw DomainError("fit_order: size mismatch");
    std::vector<std::size_t> idx(hs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return hs[a] < hs[b]; });
    idx.resize(std::min(tail, idx.size()));

    std::vector<double> x, y;
    for (std::size_t i : idx) {
        if (hs[i] > 0.0 && std::isfinite(hs[i]) && errs[i] > 0.0 && std::isfinite(errs[i])) {
            x.push_back(std::log(hs[i]));
            y.push_back(std::log(errs[i]));
        }
    }
    if (x.size() < 2) throw FitError("fit_order: fewer than two usable points in the tail window");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw FitError("fit_order: all step sizes coincide");
    return sxy / sxx;
}

// ------------------------------------------------------------- reports

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_csv_row(std::ostream& os, const ConvergenceRow& r) {
    os << r.level << ',' << format_number(r.h) << ',' << format_number(r.p_fh) << ',' << format_number(r.p_form_h)
       << ',' << format_number(r.rel_err) << ',' << format_number(r.rel_err_form) << ','
       << format_number(r.bound_abs) << ',' << format_number(r.replicate_std) << '\n';
}

void write_csv(std::ostream& os, const ConvergenceTable& table) {
    os << csv_header << '\n';
    for (const auto& r : table.rows) write_csv_row(os, r);
}

void write_json(std::ostream& os, const ConvergenceTable& table, const RunConfig& c) {
    using nlohmann::ordered_json;
    // NaN has no JSON literal; it is written as null.
    auto num = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
    ordered_json rows = ordered_json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"level", r.level},
                        {"h", num(r.h)},
                        {"p_fh", num(r.p_fh)},
                        {"p_form_h", num(r.p_form_h)},
                        {"rel_err", num(r.rel_err)},
                        {"rel_err_form", num(r.rel_err_form)},
                        {"bound_abs", num(r.bound_abs)},
                        {"replicate_std", num(r.replicate_std)},
                        {"mlfp_distance", num(r.mlfp_distance)}});
    }
    ordered_json cfg{{"experiment", experiment_name(c.experiment)},
                     {"levels", {c.level_min, c.level_max}},
                     {"tail", c.tail}};
    if (c.experiment == ExperimentKind::ode) cfg["scheme"] = ode_kind_name(c.scheme);
    if (c.experiment == ExperimentKind::bvp2d) cfg["degree"] = c.degree;
    if (c.experiment == ExperimentKind::highdim10 || c.experiment == ExperimentKind::highdim50) {
        const HighdimSetup s = highdim_setup(c.experiment);
        cfg["dim"] = s.dim;
        cfg["correlation_length"] = c.correlation_length.value_or(s.correlation_length);
        cfg["q_max"] = s.q_max;
        cfg["samples"] = c.samples;
        cfg["target_cov"] = c.target_cov;
        cfg["replicates"] = c.replicates;
        cfg["seed"] = *c.seed;
        cfg["reference_level"] = c.reference_level;
    }
    ordered_json doc{{"experiment", table.experiment},
                     {"reference", {{"p_f", num(table.p_f)}, {"p_f_std", num(table.p_f_std)}, {"p_form", num(table.p_form)}}},
                     {"orders",
                      {{"s_est", num(table.s_est)},
                       {"s_est_form", num(table.s_est_form)},
                       {"s_est_bound", num(table.s_est_bound)},
                       {"s_est_mlfp", num(table.s_est_mlfp)}}},
                     {"rows", rows},
                     {"config", cfg}};
    os << doc.dump(2) << '\n';
}

void write_bounds_table(std::ostream& os) {
    constexpr int kPoints = 40;
    os << bounds_table_header << '\n';
    const auto f = format_number;
    for (const char* which : {"c21", "c21_sharp"}) {
        for (double sigma2 : {0.1, 1.0, 10.0}) {
            const double sigma = std::sqrt(sigma2);
            const double lo = -10.0, hi = std::log10(0.5);
            for (int i = 0; i <= kPoints; ++i) {
                const double p = std::pow(10.0, lo + (hi - lo) * i / kPoints);
                const double beta = -sigma * std_normal_quantile(p);
                const double v = std::string_view(which) == "c21" ? c21(beta, sigma, 1.0) : c21_sharp(beta, sigma, 1.0);
                os << which << ',' << f(sigma2) << ',' << f(beta) << ',' << f(p) << ",,,1,," << f(v) << '\n';
            }
        }
    }
    const double beta = 4.0;
    for (double s : {1.0, 2.0}) {
        for (double c_fe : {0.1, 1.0, 10.0}) {
            for (int i = 0; i <= kPoints; ++i) {
                const double h = std::pow(10.0, -4.0 + 4.0 * i / kPoints);
                if (!(h < bound_h_threshold(beta, s, c_fe))) continue;
                const double v = c22(beta, 1.0, DiscretizationSpec(h, s, c_fe)) / c_fe;
                os << "c22,1," << f(beta) << ',' << f(std_normal_cdf(-beta)) << ',' << f(h) << ',' << f(s) << ','
                   << f(c_fe) << ",," << f(v) << '\n';
            }
        }
    }
    std::set<int> ns;
    for (int i = 0; i <= kPoints; ++i) ns.insert(static_cast<int>(std::lround(std::pow(10.0, 4.0 * i / kPoints))));
    for (int n : ns) os << "c4,,,,,,," << n << ',' << f(c4(n)) << '\n';
}

void write_kle_info(std::ostream& os, const ExpCovKle& kle) {
    os << kle_info_header << '\n';
    double cum = 0.0;
    for (std::size_t m = 0; m < kle.order(); ++m) {
        cum += kle.eigenvalue(m);
        os << (m + 1) << ',' << format_number(kle.eigenvalue(m)) << ',' << format_number(cum) << '\n';
    }
}

}  // namespace pfbound
