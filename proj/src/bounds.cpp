#include "pfbound/bounds.hpp"

#include "pfbound/error.hpp"
#include "pfbound/normal.hpp"
#include "pfbound/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace pfbound {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

}  // namespace

DiscretizationSpec::DiscretizationSpec(double h_, double s_, double c_fe_) : h(h_), s(s_), c_fe(c_fe_) {
    require_positive(h, "DiscretizationSpec: h");
    require_positive(s, "DiscretizationSpec: s");
    require_positive(c_fe, "DiscretizationSpec: C_FE");
}

double DiscretizationSpec::hs() const noexcept { return std::pow(h, s); }

double c1(double c_lipschitz, const DiscretizationSpec& spec) {
    require_positive(c_lipschitz, "c1: C_L");
    return 2.0 * c_lipschitz * spec.c_fe;
}

double c21(double beta, double sigma, double c_fe) {
    require_positive(beta, "c21: beta");
    require_positive(sigma, "c21: sigma");
    require_positive(c_fe, "c21: C_FE");
    const double s2 = sigma * sigma;
    return (beta / s2 + 1.0 / beta + 1.0 / (beta * s2) + 1.0 / (beta * beta * beta)) * c_fe;
}

double c21_sharp(double beta, double sigma, double c_fe) {
    require_positive(beta, "c21_sharp: beta");
    require_positive(sigma, "c21_sharp: sigma");
    require_positive(c_fe, "c21_sharp: C_FE");
    const double t = beta / sigma;
    const double r2 = std::sqrt(2.0 + t * t);
    const double r4 = std::sqrt(4.0 + t * t);
    const double ratio = (r4 + t) / (r2 + t);
    const double inner = beta / (sigma * sigma) + (beta / r2 + sigma) / (sigma * sigma * r2 + beta * sigma);
    return ratio * inner * c_fe;
}

double bound_h_threshold(double beta, double s, double c_fe) { return std::pow(beta / c_fe, 1.0 / s); }

double c22(double beta, double sigma, const DiscretizationSpec& spec) {
    require_positive(beta, "c22: beta");
    require_positive(sigma, "c22: sigma");
    const double e = spec.c_fe * spec.hs();
    if (!(beta - e > 0.0)) {
        const double thr = bound_h_threshold(beta, spec.s, spec.c_fe);
        throw BoundValidityError("h too large for bound validity: need h < (beta/C_FE)^(1/s) = " + std::to_string(thr),
                                 thr);
    }
    const double s2 = sigma * sigma;
    const double gap = beta - e;
    return (beta + 1.0 / beta) * (1.0 / s2 + 1.0 / (gap * gap)) * std::exp((2.0 * beta * e - e * e) / (2.0 * s2)) *
           spec.c_fe;
}

double c2(double beta, double sigma, const DiscretizationSpec& spec) {
    return c21(beta, sigma, spec.c_fe) + c22(beta, sigma, spec);
}

double c4(int n) {
    if (n < 1) throw DomainError("c4: n must be at least 1");
    if (n == 1) return 1.0;
    const double nd = n;
    return 1.0 + std::sqrt(std::numbers::pi) * std::exp(std::lgamma(0.5 * (nd + 1.0)) - std::lgamma(0.5 * nd));
}

C3Estimate estimate_c3(const LimitStateEvaluator& exact, const LimitStateEvaluator& approx,
                       std::span<const ParameterVector> surface_points, const C3Options& opt) {
    if (exact.dim() != approx.dim()) throw DomainError("estimate_c3: dimension mismatch");
    if (surface_points.empty()) throw DomainError("estimate_c3: at least one surface point required");
    if (!(opt.nu_h > 0.0 && opt.nu_h <= 1.0)) throw DomainError("estimate_c3: nu_h must lie in (0, 1]");

    double c_fe = 0.0;
    if (approx.tag().c_fe) {
        c_fe = *approx.tag().c_fe;
    } else {
        if (!approx.tag().h) throw DomainError("estimate_c3: approximate model carries no mesh size");
        const double hs = std::pow(*approx.tag().h, approx.tag().s);
        auto update = [&](const ParameterVector& u) {
            c_fe = std::max(c_fe, std::abs(exact.evaluate(u) - approx.evaluate(u)) / hs);
        };
        RandomStream rng(opt.seed, {0xC3});
        std::vector<double> buf(exact.dim());
        for (std::size_t k = 0; k < opt.samples; ++k) {
            for (double& v : buf) v = rng.normal();
            update(ParameterVector(buf));
        }
        for (const auto& u : surface_points) update(u);
    }

    double ratio = 0.0;
    for (const auto& u : surface_points) {
        const double gn = norm2(exact.gradient(u));
        if (!(gn > 0.0) || !std::isfinite(gn)) {
            throw GradientError("estimate_c3: exact gradient vanishes on the limit-state surface");
        }
        ratio = std::max(ratio, norm2(approx.gradient(u)) / (opt.nu_h * opt.nu_h * gn * gn));
    }
    return C3Estimate{c_fe * ratio, c_fe, ratio};
}

double estimate_c3(const LimitStateEvaluator& exact, const LimitStateEvaluator& approx, const ParameterVector& mlfp_h,
                   double nu_h) {
    C3Options opt;
    opt.nu_h = nu_h;
    return estimate_c3(exact, approx, std::span<const ParameterVector>(&mlfp_h, 1), opt).c3;
}

BoundReport assemble_bounds(const FormResult& form_h, const DiscretizationSpec& spec, double c3, int n,
                            std::optional<double> beta_exact) {
    const double b_h = form_h.beta;
    const double b = beta_exact.value_or(b_h);
    const DiscretizationSpec sc = spec.with_c_fe(c3);
    BoundReport r{};
    r.beta_h = b_h;
    r.n = n;
    r.c3 = c3;
    r.hs = sc.hs();
    r.c21 = c21(b_h, 1.0, c3);
    r.c21_sharp = c21_sharp(b_h, 1.0, c3);
    r.c22 = c22(b_h, 1.0, sc);
    r.c2 = r.c21 + r.c22;
    r.c4 = c4(n);
    r.p_form_h = form_h.p_form;
    r.bound_abs = r.c2 * r.c4 * r.hs * r.p_form_h;
    r.bound_rel_form = c2(b, 1.0, sc) * r.hs;
    return r;
}

}  // namespace pfbound
