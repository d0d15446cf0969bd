#include "pfbound/form.hpp"

#include "pfbound/error.hpp"
#include "pfbound/normal.hpp"

#include <algorithm>
#include <cmath>

namespace pfbound {

namespace {

struct Point {
    std::vector<double> u;
    double g;
    std::vector<double> grad;
};

double merit(const std::vector<double>& u, double g, double c) { return 0.5 * dot(u, u) + c * std::abs(g); }

// Component of u orthogonal to the gradient direction.
double off_line_distance(const std::vector<double>& u, const std::vector<double>& grad) {
    const double gn = norm2(grad);
    const double proj = dot(u, grad) / gn;
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = u[i] - proj * grad[i] / gn;
        s += r * r;
    }
    return std::sqrt(s);
}

}  // namespace

FormResult find_mlfp(const LimitStateEvaluator& lsf, std::optional<ParameterVector> start, const FormOptions& opt) {
    const std::size_t n = lsf.dim();
    const double g0 = lsf.evaluate(ParameterVector::zeros(n));
    if (!(g0 > 0.0)) throw PreconditionError(lsf.name() + ": FORM requires G(0) > 0");
    const double tol_g = opt.tol_g * std::abs(g0);
    const double tol_u = lsf.has_analytic_gradient() ? opt.tol_u : std::max(opt.tol_u, opt.tol_u_fd);
    auto is_kkt = [&](const Point& p) {
        const double gn = norm2(p.grad);
        return gn > 0.0 && std::abs(p.g) <= tol_g &&
               off_line_distance(p.u, p.grad) <= tol_u * std::max(1.0, norm2(p.u));
    };

    const ParameterVector u0 = start ? *start : ParameterVector::zeros(n);
    if (u0.size() != n) throw DomainError("find_mlfp: start dimension mismatch");

    auto eval_point = [&](std::vector<double> u) {
        const ParameterVector p(u);
        Point pt{std::move(u), lsf.evaluate(p), lsf.gradient(p)};
        return pt;
    };

    Point cur = eval_point(u0.vector());
    std::vector<std::pair<double, double>> history;
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        const double gn = norm2(cur.grad);
        if (!(gn > 0.0) || !std::isfinite(gn)) throw GradientError(lsf.name() + ": gradient vanished during FORM");

        if (is_kkt(cur)) {
            converged = true;
            break;
        }

        // HLRF target and search direction.
        const double scale = (dot(cur.grad, cur.u) - cur.g) / (gn * gn);
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = scale * cur.grad[i] - cur.u[i];

        const double c = std::max(opt.merit_gamma * norm2(cur.u) / gn, 1.0 / gn) + 1e-12;
        const double m0 = merit(cur.u, cur.g, c);
        // Directional derivative of the merit function along d (HLRF gives a descent direction).
        const double slope = dot(cur.u, d) - c * std::abs(cur.g);

        double step = 1.0;
        Point trial;
        for (int ls = 0; ls < 60; ++ls) {
            std::vector<double> ut(n);
            for (std::size_t i = 0; i < n; ++i) ut[i] = cur.u[i] + step * d[i];
            const ParameterVector pt(ut);
            const double gt = lsf.evaluate(pt);
            if (std::isfinite(gt) && merit(ut, gt, c) <= m0 + opt.armijo * step * slope) {
                trial = Point{std::move(ut), gt, lsf.gradient(pt)};
                break;
            }
            step *= opt.backtrack;
        }
        if (trial.u.empty()) break;  // line search failed: report non-convergence
        history.emplace_back(m0, merit(trial.u, trial.g, c));
        cur = std::move(trial);
    }
    if (!converged && it == opt.max_iter) converged = is_kkt(cur);

    ParameterVector mlfp(cur.u);
    const double beta = mlfp.norm();
    return FormResult{std::move(mlfp), beta, std_normal_cdf(-beta), it, converged, std::abs(cur.g), std::move(history)};
}

double mlfp_distance(const FormResult& a, const FormResult& b) {
    if (a.mlfp.size() != b.mlfp.size()) throw DomainError("mlfp_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.mlfp.size(); ++i) {
        const double d = a.mlfp[i] - b.mlfp[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace pfbound
