#include "pfbound/limit_state.hpp"

#include "pfbound/error.hpp"
#include "pfbound/fem1d.hpp"
#include "pfbound/kernels.hpp"
#include "pfbound/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pfbound {

// --------------------------------------------------- LimitStateEvaluator

LimitStateEvaluator::LimitStateEvaluator(std::size_t dim, Function evaluate, Gradient gradient, DiscretizationTag tag,
                                         std::string name, BatchFunction batch)
    : dim_(dim),
      eval_(std::move(evaluate)),
      grad_(std::move(gradient)),
      batch_(std::move(batch)),
      tag_(tag),
      name_(std::move(name)) {
    if (dim_ < 1) throw DomainError("LimitStateEvaluator: dimension must be at least 1");
    if (!eval_) throw DomainError("LimitStateEvaluator: missing evaluate function");
    if (tag_.h && !(*tag_.h > 0.0)) throw DomainError("LimitStateEvaluator: h must be positive");
}

double LimitStateEvaluator::evaluate(const ParameterVector& u) const {
    if (u.size() != dim_) {
        throw DomainError(name_ + ": expected dimension " + std::to_string(dim_) + ", got " + std::to_string(u.size()));
    }
    return eval_(u);
}

std::vector<double> LimitStateEvaluator::gradient(const ParameterVector& u) const {
    if (!grad_) return fd_gradient(*this, u);
    if (u.size() != dim_) throw DomainError(name_ + ": gradient dimension mismatch");
    return grad_(u);
}

void LimitStateEvaluator::evaluate_batch(std::span<const double> points, std::span<double> out) const {
    if (points.size() != out.size() * dim_) throw DomainError(name_ + ": batch size mismatch");
    for (double v : points) {
        if (!std::isfinite(v)) throw DomainError(name_ + ": non-finite parameter in batch");
    }
    if (batch_) {
        batch_(points, out);
        return;
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = eval_(ParameterVector(std::vector<double>(points.begin() + static_cast<std::ptrdiff_t>(k * dim_),
                                                           points.begin() + static_cast<std::ptrdiff_t>((k + 1) * dim_))));
    }
}

std::vector<double> fd_gradient(const LimitStateEvaluator& lsf, const ParameterVector& u, double step) {
    if (!(step > 0.0)) throw DomainError("fd_gradient: step must be positive");
    const std::size_t n = lsf.dim();
    if (u.size() != n) throw DomainError("fd_gradient: dimension mismatch");
    // Stencil rows: u + step e_i for i < n, then u - step e_i.
    std::vector<double> pts(2 * n * n);
    for (std::size_t r = 0; r < 2 * n; ++r) {
        std::copy(u.values().begin(), u.values().end(), pts.begin() + static_cast<std::ptrdiff_t>(r * n));
        const std::size_t i = r % n;
        pts[r * n + i] += r < n ? step : -step;
    }
    std::vector<double> vals(2 * n);
    lsf.evaluate_batch(pts, vals);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double fp = vals[i];
        const double fm = vals[n + i];
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw GradientError(lsf.name() + ": non-finite value in finite-difference stencil, coordinate " +
                                std::to_string(i));
        }
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

// ----------------------------------------------------- LinearGaussianLsf

LinearGaussianLsf::LinearGaussianLsf(std::vector<double> a, double b) : alpha(std::move(a)), beta(b) {
    if (alpha.empty()) throw DomainError("LinearGaussianLsf: empty alpha");
    if (!(beta > 0.0)) throw DomainError("LinearGaussianLsf: beta must be positive");
    if (!(norm2(alpha) > 0.0)) throw DomainError("LinearGaussianLsf: alpha must be non-zero");
}

double LinearGaussianLsf::sigma() const { return norm2(alpha); }

double LinearGaussianLsf::failure_probability() const { return std_normal_cdf(-beta / sigma()); }

LimitStateEvaluator LinearGaussianLsf::evaluator(DiscretizationTag tag) const {
    auto a = alpha;
    const double b = beta;
    return LimitStateEvaluator(
        a.size(), [a, b](const ParameterVector& u) { return dot(a, u.values()) + b; },
        [a](const ParameterVector&) { return a; }, tag, "linear");
}

// ------------------------------------------------------------------ ODE

LimitStateEvaluator make_ode_lsf(std::optional<OdeScheme> scheme, double y_max) {
    if (!(y_max > 1.0) || !std::isfinite(y_max)) throw DomainError("make_ode_lsf: y_max must exceed 1");
    if (!scheme) {
        return LimitStateEvaluator(
            1, [y_max](const ParameterVector& u) { return y_max - std::exp(-u[0]); },
            [](const ParameterVector& u) { return std::vector<double>{std::exp(-u[0])}; }, DiscretizationTag{},
            "ode-exact");
    }
    const OdeScheme sch = *scheme;
    DiscretizationTag tag{sch.h(), sch.order(), std::nullopt};
    return LimitStateEvaluator(
        1, [sch, y_max](const ParameterVector& u) { return y_max - integrate_to_one(sch, u[0]); }, {}, tag,
        "ode-" + std::string(ode_kind_name(sch.kind())));
}

// -------------------------------------------------------------- BVP 2-D

namespace {

constexpr double bvp2d_exact_load_response() {
    constexpr double x = Bvp2dModel::x_hat;
    return x * x * x / 6.0 - x * x / 2.0 + x / 3.0;
}

double unit_load(double x) { return 1.0 - x; }

void require_bvp_disc(const Bvp2dDiscretization& d) {
    if (d.degree != 1 && d.degree != 2) throw DomainError("bvp2d: degree must be 1 or 2");
    if (d.level < 0 || d.level > 20) throw DomainError("bvp2d: level must lie in [0, 20]");
}

}  // namespace

Bvp2dModel::Bvp2dModel(std::optional<Bvp2dDiscretization> disc) : disc_(disc), w_hat_(bvp2d_exact_load_response()) {
    if (disc_) {
        require_bvp_disc(*disc_);
        const FemSolution w = solve([](double) { return 1.0; }, unit_load, {0.0, 0.0}, Mesh1D::uniform(disc_->level),
                                    disc_->degree);
        w_hat_ = point_value(w, x_hat);
    }
}

double Bvp2dModel::surface(double u1) const noexcept {
    // With constant a, y = u2 x + w(x)/a, so G = u2 x̂ + e^{3 - u1/3} w(x̂) - y_max; this
    // also holds for the Galerkin solution because the lifting u2 x lies in V_h.
    return (y_max - w_hat_ * std::exp(3.0 - u1 / 3.0)) / x_hat;
}

double Bvp2dModel::evaluate(const ParameterVector& u) const {
    if (u.size() != 2) throw DomainError("bvp2d: expected a 2-dimensional parameter");
    const double inv_a = std::exp(3.0 - u[0] / 3.0);
    if (!disc_) return u[1] * x_hat + inv_a * w_hat_ - y_max;
    const double a = std::exp(u[0] / 3.0 - 3.0);
    const FemSolution y = solve([a](double) { return a; }, unit_load, {0.0, u[1]}, Mesh1D::uniform(disc_->level),
                                disc_->degree);
    return point_value(y, x_hat) - y_max;
}

LimitStateEvaluator Bvp2dModel::evaluator() const {
    auto self = std::make_shared<const Bvp2dModel>(*this);
    LimitStateEvaluator::Gradient grad;
    DiscretizationTag tag;
    std::string name = "bvp2d-exact";
    if (!disc_) {
        grad = [w = w_hat_](const ParameterVector& u) {
            return std::vector<double>{-w * std::exp(3.0 - u[0] / 3.0) / 3.0, x_hat};
        };
    } else {
        tag = DiscretizationTag{std::ldexp(1.0, -disc_->level), disc_->degree + 1.0, std::nullopt};
        name = "bvp2d-p" + std::to_string(disc_->degree);
    }
    return LimitStateEvaluator(2, [self](const ParameterVector& u) { return self->evaluate(u); }, grad, tag, name);
}

LimitStateEvaluator make_bvp2d_lsf(std::optional<Bvp2dDiscretization> disc) { return Bvp2dModel(disc).evaluator(); }

// ------------------------------------------------------------ diffusion

DiffusionModel::DiffusionModel(std::shared_ptr<const ExpCovKle> kle, double q_max, int level, DiffusionKind kind)
    : kle_(std::move(kle)), q_max_(q_max), level_(level), kind_(kind) {
    if (!kle_) throw DomainError("DiffusionModel: missing KLE");
    if (!std::isfinite(q_max)) throw DomainError("DiffusionModel: q_max must be finite");
    const Mesh1D mesh = Mesh1D::uniform(level);
    basis_ = kle_->basis_table(quadrature_points(mesh));
    const double one = 1.0;
    basis_1_ = kle_->basis_table(std::span<const double>(&one, 1));
}

double DiffusionModel::outflow(const ParameterVector& u) const {
    if (u.size() != kle_->order()) throw DomainError("diffusion: parameter dimension does not match KLE order");
    const Mesh1D mesh = Mesh1D::uniform(level_);
    std::vector<double> a(basis_.size() / kle_->order());
    kernels::affine_combination(basis_, u.values(), kle_->mean(), a);
    if (kind_ == DiffusionKind::lognormal) {
        kernels::exp_inplace(a);
    } else {
        for (double& v : a) v = diffusion_from_field(kind_, v);
    }
    const double a1 = diffusion_from_field(kind_, kle_->mean() + dot(basis_1_, u.values()));
    const FemSolution sol = solve(a, [a1](double) { return a1; }, {}, {1.0, 0.0}, mesh, 1);
    // Only the value at x = 1 of the coefficient handle is used.
    return flux(sol, 1.0);
}

double DiffusionModel::outflow_reference(const ParameterVector& u) const {
    if (u.size() != kle_->order()) throw DomainError("diffusion: parameter dimension does not match KLE order");
    auto kle = kle_;
    const DiffusionKind kind = kind_;
    const FemSolution sol = solve([kle, kind, u](double x) { return diffusion_value(*kle, kind, u, x); }, {},
                                  {1.0, 0.0}, Mesh1D::uniform(level_), 1);
    return flux(sol, 1.0);
}

void DiffusionModel::outflow_batch(std::span<const double> points, std::span<double> out) const {
    const std::size_t dim = kle_->order();
    if (points.size() != out.size() * dim) throw DomainError("diffusion: batch size mismatch");
    const Mesh1D mesh = Mesh1D::uniform(level_);
    const std::size_t ne = mesh.elements();
    if (ne < 2) {
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k] = outflow(ParameterVector(std::vector<double>(points.begin() + static_cast<std::ptrdiff_t>(k * dim),
                                                                 points.begin() + static_cast<std::ptrdiff_t>((k + 1) * dim))));
        }
        return;
    }
    const std::size_t nq = basis_.size() / dim;
    const std::size_t n = ne - 1;  // interior nodes
    const double h = mesh.h();
    const double inv_h = 1.0 / h;
    constexpr std::size_t kLanes = 8;

    std::vector<double> z(kLanes * nq);
    std::vector<double> abar(kLanes * ne);
    std::vector<double> diag(kLanes * n), sub(kLanes * n), rhs(kLanes * n);
    for (std::size_t k0 = 0; k0 < out.size(); k0 += kLanes) {
        const std::size_t b = std::min(kLanes, out.size() - k0);
        const auto coeff = points.subspan(k0 * dim, b * dim);
        const std::span<double> zb(z.data(), b * nq);
        kernels::affine_combination_batch(basis_, nq, coeff, b, kle_->mean(), zb);
        if (kind_ == DiffusionKind::lognormal) {
            kernels::exp_inplace(zb);
        } else {
            for (double& v : zb) v = diffusion_from_field(kind_, v);
        }
        // Same element averages, matrix entries and lifting load as the
        // linear-element assembly in fem1d, laid out one system per lane.
        kernels::element_average_batch(zb, nq, ne, b, GaussRule3::weights, {abar.data(), ne * b});
        // Positive quadrature values give positive averages; the converse
        // check on the averages is enough to catch exp under/overflow.
        bool elliptic = true;
        for (std::size_t j = 0; j < ne * b; ++j) {
            elliptic &= (abar[j] > 0.0) & (abar[j] <= std::numeric_limits<double>::max());
        }
        if (!elliptic) throw EllipticityError("diffusion: coefficient not positive");
        for (std::size_t j = 0; j < n * b; ++j) {
            diag[j] = (abar[j] + abar[j + b]) * inv_h;
            sub[j] = -abar[j] * inv_h;
            rhs[j] = -(abar[j + b] - abar[j]);  // lifting slope y(1) - y(0) = -1
        }
        if (!kernels::tridiag_solve_batch({diag.data(), n * b}, {sub.data(), n * b}, {rhs.data(), n * b}, n, b)) {
            throw AssemblyError("diffusion: stiffness matrix not positive definite");
        }
        for (std::size_t k = 0; k < b; ++k) {
            const auto u = coeff.subspan(k * dim, dim);
            const double a1 = diffusion_from_field(kind_, kle_->mean() + dot(basis_1_, u));
            // y_h at the last interior node = correction + lifting 1 - x = h.
            const double y_last = rhs[(n - 1) * b + k] + (1.0 - mesh.node(ne - 1));
            const double slope = (0.0 - y_last) * inv_h;
            out[k0 + k] = -a1 * slope;
        }
    }
}

LimitStateEvaluator DiffusionModel::evaluator() const {
    auto self = std::make_shared<const DiffusionModel>(*this);
    DiscretizationTag tag{std::ldexp(1.0, -level_), 1.0, std::nullopt};
    return LimitStateEvaluator(
        kle_->order(), [self](const ParameterVector& u) { return self->q_max() - self->outflow(u); }, {}, tag,
        "diffusion-l" + std::to_string(level_), [self](std::span<const double> points, std::span<double> out) {
            self->outflow_batch(points, out);
            for (double& v : out) v = self->q_max() - v;
        });
}

LimitStateEvaluator make_diffusion_lsf(std::shared_ptr<const ExpCovKle> kle, double q_max, int level) {
    return DiffusionModel(std::move(kle), q_max, level).evaluator();
}

}  // namespace pfbound
