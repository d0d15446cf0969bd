// Acceptance suite: one PASS/FAIL line per criterion, preceded by the
// individual checks. Exit status is nonzero if any selected criterion fails.
//
//   pfbound_acceptance                 all criteria (3 and 4 take minutes)
//   pfbound_acceptance --criterion 3   a single criterion
//   pfbound_acceptance --full          criterion 3 with 100 replicates and the tight tolerance

#include "pfbound/bounds.hpp"
#include "pfbound/error.hpp"
#include "pfbound/experiments.hpp"
#include "pfbound/kle.hpp"
#include "pfbound/normal.hpp"

#include "CLI11.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace pfbound;

namespace {

// ------------------------------------------------------------ tolerances

constexpr double kOdePf = 1.13e-4, kOdePfRel = 0.01;
constexpr double kOdeEulerOrder = 1.0, kOdeCnOrder = 2.0, kOdeOrderTol = 0.15, kOdeCnOrderTol = 0.2;
constexpr double kOdeRuntime = 1.0;

constexpr double kBvpPf = 1.71e-4, kBvpForm = 2.08e-4, kBvpRel = 0.02;
constexpr double kBvpOrderP1 = 2.0, kBvpTolP1 = 0.3, kBvpOrderP2 = 3.0, kBvpTolP2 = 0.4, kBvpBoundTol = 0.3;
constexpr double kBvpRuntime = 30.0;

constexpr double kHd10Pf = 3.38e-4, kHd10Form = 4.66e-4, kHd10FormRel = 0.10;
constexpr double kHd10RelFull = 0.10, kHd10RelCi = 0.15;
constexpr double kHd10Cov = 0.03;
constexpr double kHdOrder = 1.0, kHdOrderTol = 0.3;
constexpr double kHd10Runtime = 600.0;

constexpr double kHd50Pf = 7.18e-5, kHd50Form = 1.52e-4, kHd50Rel = 0.15;

constexpr double kKle10 = 0.93, kKle50 = 0.96, kKleTol = 0.01, kOrthoTol = 1e-8;

constexpr double kRatioTol = 1e-12, kC22LimitTol = 1e-4, kC4Tol = 1e-12;
constexpr double kC4SqrtLo = 1.0, kC4SqrtHi = 1.5;
constexpr double kBoundsRuntime = 5.0;

// ------------------------------------------------------------ reporting

class Criterion {
public:
    Criterion(int id, std::string title) : id_(id), title_(std::move(title)), start_(clock::now()) {}

    void check(bool ok, const std::string& what) {
        std::cout << "  " << (ok ? "ok   " : "FAIL ") << what << '\n' << std::flush;
        ok_ = ok_ && ok;
    }
    void note(const std::string& what) { std::cout << "  info " << what << '\n' << std::flush; }
    [[nodiscard]] double seconds() const { return std::chrono::duration<double>(clock::now() - start_).count(); }

    bool finish() {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f s", seconds());
        std::cout << (ok_ ? "PASS" : "FAIL") << " criterion " << id_ << ": " << title_ << " (" << buf << ")\n"
                  << std::flush;
        return ok_;
    }

private:
    using clock = std::chrono::steady_clock;
    int id_;
    std::string title_;
    clock::time_point start_;
    bool ok_ = true;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

std::string within(const std::string& name, double value, double target, double tol) {
    return name + " = " + fmt(value) + " (target " + fmt(target) + " ± " + fmt(tol) + ")";
}

bool near(double value, double target, double tol) { return std::abs(value - target) <= tol; }
bool near_rel(double value, double target, double rel) { return std::abs(value - target) <= rel * target; }

std::string rel_desc(const std::string& name, double value, double target, double rel) {
    return name + " = " + fmt(value) + " (target " + fmt(target) + " within " + fmt(100.0 * rel) + "%)";
}

void print_rows(Criterion& c, const ConvergenceTable& t) {
    for (const auto& r : t.rows) {
        c.note("level " + std::to_string(r.level) + ": p_fh " + fmt(r.p_fh) + ", rel_err " + fmt(r.rel_err) +
               ", rel_err_form " + fmt(r.rel_err_form) + ", bound_abs " + fmt(r.bound_abs) + ", std " +
               fmt(r.replicate_std));
    }
}

double phi_ref(double x) { return boost::math::cdf(boost::math::normal_distribution<double>(), x); }

// ------------------------------------------------------------ criteria

bool criterion_ode() {
    Criterion c(1, "ODE experiment: reference value, Euler/Crank-Nicolson orders, MLFP orders");
    for (auto [kind, order, tol] : {std::tuple{OdeKind::explicit_euler, kOdeEulerOrder, kOdeOrderTol},
                                    std::tuple{OdeKind::crank_nicolson, kOdeCnOrder, kOdeCnOrderTol}}) {
        RunConfig cfg;
        cfg.experiment = ExperimentKind::ode;
        cfg.scheme = kind;
        cfg.level_min = 0;
        cfg.level_max = 9;
        cfg.tail = 5;  // levels 5..9
        const ConvergenceTable t = run_experiment(cfg);
        const std::string name(ode_kind_name(kind));
        if (kind == OdeKind::explicit_euler) c.check(near_rel(t.p_f, kOdePf, kOdePfRel), rel_desc("P_f", t.p_f, kOdePf, kOdePfRel));
        c.check(near(t.s_est, order, tol), within(name + " rel_err order (levels 5..9)", t.s_est, order, tol));
        c.check(near(t.s_est_mlfp, order, tol), within(name + " MLFP-distance order", t.s_est_mlfp, order, tol));
    }
    c.check(c.seconds() < kOdeRuntime, "runtime " + fmt(c.seconds()) + " s < " + fmt(kOdeRuntime) + " s");
    return c.finish();
}

bool criterion_bvp2d() {
    Criterion c(2, "BVP 2-D experiment: quadrature/FORM references, P1/P2 orders, bound slope");
    for (auto [degree, order, tol] : {std::tuple{1, kBvpOrderP1, kBvpTolP1}, std::tuple{2, kBvpOrderP2, kBvpTolP2}}) {
        RunConfig cfg;
        cfg.experiment = ExperimentKind::bvp2d;
        cfg.degree = degree;
        cfg.level_min = 1;
        cfg.level_max = 9;
        cfg.tail = 5;
        const ConvergenceTable t = run_experiment(cfg);
        const std::string name = "P" + std::to_string(degree);
        if (degree == 1) {
            c.check(near_rel(t.p_f, kBvpPf, kBvpRel), rel_desc("quadrature P_f", t.p_f, kBvpPf, kBvpRel));
            c.check(near_rel(t.p_form, kBvpForm, kBvpRel), rel_desc("FORM P_f", t.p_form, kBvpForm, kBvpRel));
        }
        c.check(near(t.s_est, order, tol), within(name + " rel_err order (levels 5..9)", t.s_est, order, tol));
        c.check(near(t.s_est_form, order, tol), within(name + " rel_err_form order", t.s_est_form, order, tol));
        c.check(near(t.s_est_bound, order, kBvpBoundTol), within(name + " bound_abs slope", t.s_est_bound, order, kBvpBoundTol));
    }
    c.check(c.seconds() < kBvpRuntime, "runtime " + fmt(c.seconds()) + " s < " + fmt(kBvpRuntime) + " s");
    return c.finish();
}

bool criterion_highdim10(std::size_t replicates, unsigned threads) {
    const bool full = replicates >= 100;
    const double rel = full ? kHd10RelFull : kHd10RelCi;
    Criterion c(3, "high-dimensional experiment n=10: SIS/FORM references and orders on levels 7..11");
    c.note(std::to_string(replicates) + " replicates, N = 1e4, target cov 0.25, reference level 12");
    RunConfig cfg;
    cfg.experiment = ExperimentKind::highdim10;
    cfg.level_min = 7;
    cfg.level_max = 11;
    cfg.reference_level = 12;
    cfg.samples = 10000;
    cfg.target_cov = 0.25;
    cfg.replicates = replicates;
    cfg.seed = 1;
    cfg.threads = threads;
    cfg.tail = 5;
    const ConvergenceTable t = run_experiment(cfg);
    print_rows(c, t);
    const double cov_mean = t.p_f_std / (t.p_f * std::sqrt(static_cast<double>(replicates)));
    c.note("single-run cov " + fmt(t.p_f_std / t.p_f));
    c.check(near_rel(t.p_f, kHd10Pf, rel), rel_desc("SIS mean P_f", t.p_f, kHd10Pf, rel));
    c.check(cov_mean <= kHd10Cov, "replicate cov of the mean " + fmt(cov_mean) + " <= " + fmt(kHd10Cov));
    c.check(near_rel(t.p_form, kHd10Form, kHd10FormRel), rel_desc("FORM P_f", t.p_form, kHd10Form, kHd10FormRel));
    c.check(near(t.s_est, kHdOrder, kHdOrderTol), within("rel_err slope", t.s_est, kHdOrder, kHdOrderTol));
    c.check(near(t.s_est_form, kHdOrder, kHdOrderTol), within("rel_err_form slope", t.s_est_form, kHdOrder, kHdOrderTol));
    c.check(near(t.s_est_bound, kHdOrder, kHdOrderTol), within("bound_abs slope", t.s_est_bound, kHdOrder, kHdOrderTol));
    c.note("runtime " + fmt(c.seconds()) + " s (desktop target " + fmt(kHd10Runtime) + " s)");
    return c.finish();
}

bool criterion_highdim50(std::size_t replicates, unsigned threads) {
    Criterion c(4, "50-dimensional variant: SIS/FORM references and slope on the finest 4 levels");
    c.note(std::to_string(replicates) + " replicates, N = 1e4, target cov 0.25, reference level 12");
    RunConfig cfg;
    cfg.experiment = ExperimentKind::highdim50;
    cfg.level_min = 8;
    cfg.level_max = 11;
    cfg.reference_level = 12;
    cfg.samples = 10000;
    cfg.target_cov = 0.25;
    cfg.replicates = replicates;
    cfg.seed = 1;
    cfg.threads = threads;
    cfg.tail = 4;
    const ConvergenceTable t = run_experiment(cfg);
    print_rows(c, t);
    c.check(near_rel(t.p_f, kHd50Pf, kHd50Rel), rel_desc("SIS mean P_f", t.p_f, kHd50Pf, kHd50Rel));
    c.check(near_rel(t.p_form, kHd50Form, kHd50Rel), rel_desc("FORM P_f", t.p_form, kHd50Form, kHd50Rel));
    c.check(near(t.s_est, kHdOrder, kHdOrderTol), within("rel_err slope (levels 8..11)", t.s_est, kHdOrder, kHdOrderTol));
    c.note("rel_err_form slope " + fmt(t.s_est_form) + ", bound_abs slope " + fmt(t.s_est_bound));
    return c.finish();
}

bool criterion_kle() {
    Criterion c(5, "KLE: captured variance and eigenfunction orthonormality");
    for (auto [lambda, n, target] : {std::tuple{0.3, std::size_t{10}, kKle10}, std::tuple{0.1, std::size_t{50}, kKle50}}) {
        const ExpCovKle kle = build_kle(0.1, 0.2, lambda, n);
        const std::string tag = "n=" + std::to_string(n) + ", λ=" + fmt(lambda);
        c.check(near(kle.captured_variance(), target, kKleTol),
                within("captured variance " + tag, kle.captured_variance(), target, kKleTol));
        // composite 10-point Gauss–Legendre, independent of the closed-form normalization
        auto inner = [&](std::size_t i, std::size_t j) {
            constexpr int panels = 200;
            double s = 0.0;
            for (int k = 0; k < panels; ++k) {
                s += boost::math::quadrature::gauss<double, 10>::integrate(
                    [&](double x) { return kle.eigenfunction(i, x) * kle.eigenfunction(j, x); }, double(k) / panels,
                    double(k + 1) / panels);
            }
            return s;
        };
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) worst = std::max(worst, std::abs(inner(i, j) - (i == j ? 1.0 : 0.0)));
        c.check(worst <= kOrthoTol, "orthonormality defect " + tag + " = " + fmt(worst) + " <= " + fmt(kOrthoTol));
    }
    return c.finish();
}

bool criterion_bounds() {
    Criterion c(6, "bounds property suite");
    // Gordon sandwich on a (β, σ) grid
    {
        bool ok = true, ratio_ok = true;
        for (double sigma : {0.1, 0.5, 1.0, 2.0, 10.0})
            for (int i = 0; i < 400; ++i) {
                const double beta = sigma * (0.01 + 11.99 * i / 399.0);  // t = β/σ in [0.01, 12]
                const double p = phi_ref(-beta / sigma);
                const CdfBracket g = cdf_bounds_gordon(-beta, sigma);
                ok = ok && g.lower <= p * (1.0 + 1e-13) && p <= g.upper * (1.0 + 1e-13);
                if (sigma == 1.0) {
                    const double expect = (beta * beta + 1.0) / (beta * beta);
                    ratio_ok = ratio_ok && std::abs(g.upper / g.lower - expect) <= kRatioTol * expect;
                }
            }
        c.check(ok, "Gordon bounds contain Φ(-β/σ) on a 5 x 400 (σ, β) grid");
        c.check(ratio_ok, "upper/lower = (β²+1)/β² to " + fmt(kRatioTol) + " relative");
    }
    // c22 → c21
    {
        double worst = 0.0;
        for (double s : {1.0, 2.0})
            for (double cfe : {0.1, 1.0, 10.0})
                for (double beta : {2.0, 4.0, 6.0}) {
                    const double lim = c21(beta, 1.0, cfe);
                    worst = std::max(worst, std::abs(c22(beta, 1.0, DiscretizationSpec(std::ldexp(1.0, -20), s, cfe)) - lim) / lim);
                }
        c.check(worst <= kC22LimitTol, "c22 at h = 2^-20 matches c21: worst relative gap " + fmt(worst));
    }
    // c4
    {
        c.check(std::abs(c4(1) - 1.0) <= kC4Tol, "c4(1) = " + fmt(c4(1)));
        c.check(std::abs(c4(2) - (1.0 + M_PI / 2.0)) <= kC4Tol, "c4(2) = 1 + π/2 (" + fmt(c4(2)) + ")");
        std::vector<int> outside;
        double lo = INFINITY, hi = 0.0;
        for (int n = 4; n <= 10000; ++n) {
            const double r = c4(n) / std::sqrt(double(n));
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            if (r < kC4SqrtLo || r > kC4SqrtHi) outside.push_back(n);
        }
        std::string where;
        if (!outside.empty()) where = ", outside for n = " + std::to_string(outside.front()) + ".." + std::to_string(outside.back());
        c.check(outside.empty(), "c4(n)/√n in [" + fmt(kC4SqrtLo) + ", " + fmt(kC4SqrtHi) + "] for n in [4, 1e4]: range [" +
                                     fmt(lo) + ", " + fmt(hi) + "]" + where);
        bool tail_ok = true;
        for (int n = 14; n <= 10000; ++n) {
            const double r = c4(n) / std::sqrt(double(n));
            tail_ok = tail_ok && r >= kC4SqrtLo && r <= kC4SqrtHi;
        }
        c.note(std::string("c4(n)/√n in range for n in [14, 1e4]: ") + (tail_ok ? "yes" : "no"));
    }
    // shapes
    {
        bool order_ok = true;
        for (int i = 0; i < 41; ++i) {
            const double p = std::pow(10.0, -10.0 + i * (10.0 + std::log10(0.5)) / 40.0);
            double prev = INFINITY;
            for (double s2 : {0.1, 1.0, 10.0}) {
                const double sigma = std::sqrt(s2);
                const double v = c21(-sigma * std_normal_quantile(p), sigma, 1.0);
                order_ok = order_ok && v < prev;
                prev = v;
            }
        }
        c.check(order_ok, "c21 at fixed P_f decreases with σ² ∈ {0.1, 1, 10}");
        c.check(c21(1e-3, 1.0, 1.0) > 1e6 && c21(1e-6, 1.0, 1.0) > c21(1e-3, 1.0, 1.0), "c21 diverges as β → 0");
        double sharp_max = 0.0;
        bool below = true;
        for (double beta = 1e-6; beta <= 12.0; beta *= 1.1) {
            if (beta <= 1.0) sharp_max = std::max(sharp_max, c21_sharp(beta, 1.0, 1.0));
            if (beta >= 1.0) below = below && c21_sharp(beta, 1.0, 1.0) <= c21(beta, 1.0, 1.0);
        }
        c.check(sharp_max < 2.0, "sharp c21 stays bounded as β → 0 (max " + fmt(sharp_max) + " for β <= 1)");
        c.check(below, "sharp c21 <= c21 for β >= 1");
        bool flat = true, rising = true, threshold = true;
        for (auto [s, h_flat] : {std::pair{1.0, 1e-2}, std::pair{2.0, 1e-1}})
            for (double cfe : {0.1, 1.0, 10.0}) {
                const double lim = c21(4.0, 1.0, cfe);
                for (double h = 1e-4; h <= h_flat * 1.0001; h *= std::sqrt(10.0))
                    flat = flat && c22(4.0, 1.0, DiscretizationSpec(h, s, cfe)) <= 1.5 * lim;
                double prev = 0.0;
                const double h_max = bound_h_threshold(4.0, s, cfe);
                for (double h = 1e-4; h < h_max && h <= 1.0; h *= 1.2) {
                    const double v = c22(4.0, 1.0, DiscretizationSpec(h, s, cfe));
                    rising = rising && v >= prev;
                    prev = v;
                }
                if (h_max < 1.0) {
                    try {
                        (void)c22(4.0, 1.0, DiscretizationSpec(std::min(1.0, 1.01 * h_max), s, cfe));
                        threshold = false;
                    } catch (const BoundValidityError&) {
                    }
                }
            }
        c.check(flat, "c22 within 1.5 x its limit for h <= 1e-2 (s=1) and h <= 1e-1 (s=2)");
        c.check(rising, "c22 non-decreasing in h up to the validity threshold");
        c.check(threshold, "c22 rejects h beyond the validity threshold");
        c.check(c22(4.0, 1.0, DiscretizationSpec(0.1, 1.0, 10.0)) >= 10.0 * c21(4.0, 1.0, 10.0),
                "c22 has risen above 10 x its limit at C_FE = 10, h = 0.1, s = 1");
    }
    c.check(c.seconds() < kBoundsRuntime, "runtime " + fmt(c.seconds()) + " s < " + fmt(kBoundsRuntime) + " s");
    return c.finish();
}

bool criterion_inequality() {
    Criterion c(7, "bound_abs >= |P_f - P_f,h| on the ODE example for every level >= 4");
    for (auto kind : {OdeKind::explicit_euler, OdeKind::crank_nicolson}) {
        RunConfig cfg;
        cfg.experiment = ExperimentKind::ode;
        cfg.scheme = kind;
        cfg.level_min = 4;
        cfg.level_max = 14;
        const ConvergenceTable t = run_experiment(cfg);
        bool ok = true;
        double tightest = INFINITY;
        for (const auto& r : t.rows) {
            const double err = std::abs(r.p_fh - t.p_f);
            ok = ok && std::isfinite(r.bound_abs) && r.bound_abs >= err;
            tightest = std::min(tightest, r.bound_abs / err);
        }
        c.check(ok, std::string(ode_kind_name(kind)) + ", levels 4..14: smallest bound/error ratio " + fmt(tightest));
    }
    return c.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::vector<int> selected;
    bool full = false;
    std::size_t replicates10 = 20, replicates50 = 20;
    unsigned threads = 0;
    app.add_option("--criterion", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 7));
    app.add_flag("--full", full, "Criterion 3 with 100 replicates and the 10% tolerance");
    app.add_option("--replicates-10", replicates10, "Replicates for criterion 3")->check(CLI::PositiveNumber);
    app.add_option("--replicates-50", replicates50, "Replicates for criterion 4")->check(CLI::PositiveNumber);
    app.add_option("--threads", threads, "Worker threads (0 = all cores)");
    CLI11_PARSE(app, argc, argv);
    if (full) replicates10 = 100;
    if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7};

    const std::vector<std::function<bool()>> criteria{
        criterion_ode,
        criterion_bvp2d,
        [&] { return criterion_highdim10(replicates10, threads); },
        [&] { return criterion_highdim50(replicates50, threads); },
        criterion_kle,
        criterion_bounds,
        criterion_inequality,
    };
    int failed = 0;
    for (int id : selected) {
        bool ok = false;
        try {
            ok = criteria[id - 1]();
        } catch (const std::exception& e) {
            std::cout << "FAIL criterion " << id << ": error: " << e.what() << '\n';
        }
        failed += ok ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
