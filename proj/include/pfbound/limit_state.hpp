#pragma once

// Limit-state functions G (failure iff G(u) <= 0) and their discretizations.

#include "pfbound/kle.hpp"
#include "pfbound/ode.hpp"
#include "pfbound/parameter.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pfbound {

/// Discretization metadata: h is empty for an exact (reference) model.
struct DiscretizationTag {
    std::optional<double> h;
    double s = 0.0;                ///< convergence order of |G - G_h|
    std::optional<double> c_fe;    ///< declared error constant, if known

    [[nodiscard]] bool exact() const noexcept { return !h.has_value(); }
};

class LimitStateEvaluator {
public:
    using Function = std::function<double(const ParameterVector&)>;
    using Gradient = std::function<std::vector<double>(const ParameterVector&)>;
    /// Evaluates out.size() points stored row-major in `points`.
    using BatchFunction = std::function<void(std::span<const double> points, std::span<double> out)>;

    /// `gradient` may be empty; gradient() then uses central differences.
    /// `batch` may be empty; evaluate_batch() then loops over evaluate().
    LimitStateEvaluator(std::size_t dim, Function evaluate, Gradient gradient, DiscretizationTag tag,
                        std::string name, BatchFunction batch = {});

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] const DiscretizationTag& tag() const noexcept { return tag_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] bool has_analytic_gradient() const noexcept { return static_cast<bool>(grad_); }

    /// Throws DomainError on dimension mismatch.
    [[nodiscard]] double evaluate(const ParameterVector& u) const;
    [[nodiscard]] std::vector<double> gradient(const ParameterVector& u) const;

    /// out[k] = G(points[k*dim .. k*dim+dim)). Agrees with evaluate() up to
    /// floating-point rounding.
    void evaluate_batch(std::span<const double> points, std::span<double> out) const;

private:
    std::size_t dim_;
    Function eval_;
    Gradient grad_;
    BatchFunction batch_;
    DiscretizationTag tag_;
    std::string name_;
};

/// Central differences with step `step` in every coordinate. Throws
/// GradientError if a stencil value is not finite.
[[nodiscard]] std::vector<double> fd_gradient(const LimitStateEvaluator& lsf, const ParameterVector& u,
                                              double step = 1e-5);

/// G(u) = αᵀu + β, β > 0; αᵀU ~ N(0, ‖α‖²) and P_f = Φ(-β/‖α‖).
struct LinearGaussianLsf {
    std::vector<double> alpha;
    double beta;

    LinearGaussianLsf(std::vector<double> alpha, double beta);
    [[nodiscard]] double sigma() const;
    [[nodiscard]] double failure_probability() const;
    [[nodiscard]] LimitStateEvaluator evaluator(DiscretizationTag tag = {}) const;
};

// ---------------------------------------------------------------- ODE

/// G(u) = y_max - exp(-u) (scheme empty) or y_max - y_h(1; u).
[[nodiscard]] LimitStateEvaluator make_ode_lsf(std::optional<OdeScheme> scheme, double y_max = 40.0);

// ------------------------------------------------------------ BVP 2-D

/// -(exp(u1/3 - 3) y')' = 1 - x on (0,1), y(0) = 0, y(1) = u2;
/// G(u) = y(x̂) - y_max with x̂ = 1/3, y_max = -1/3.
struct Bvp2dDiscretization {
    int degree;  ///< 1 or 2
    int level;   ///< h = 2^-level
};

class Bvp2dModel {
public:
    static constexpr double x_hat = 1.0 / 3.0;
    static constexpr double y_max = -1.0 / 3.0;

    explicit Bvp2dModel(std::optional<Bvp2dDiscretization> disc = std::nullopt);

    [[nodiscard]] const std::optional<Bvp2dDiscretization>& discretization() const noexcept { return disc_; }

    /// Solution of -w'' = 1 - x, w(0) = w(1) = 0 at x̂ (exactly 5/81, or its FE value).
    [[nodiscard]] double load_response() const noexcept { return w_hat_; }

    /// u2 on the limit-state surface for given u1: G(u1, u2) = 0.
    [[nodiscard]] double surface(double u1) const noexcept;

    /// Closed form (exact) or FE solve + point evaluation (discretized).
    [[nodiscard]] double evaluate(const ParameterVector& u) const;

    [[nodiscard]] LimitStateEvaluator evaluator() const;

private:
    std::optional<Bvp2dDiscretization> disc_;
    double w_hat_;
};

[[nodiscard]] LimitStateEvaluator make_bvp2d_lsf(std::optional<Bvp2dDiscretization> disc);

// --------------------------------------------------------- diffusion

/// -(a y')' = 0, y(0) = 1, y(1) = 0 with a = exp(Z_n) (or 2 + tanh Z_n),
/// linear elements at h = 2^-level; G(u) = q_max - q_h(1; u).
class DiffusionModel {
public:
    DiffusionModel(std::shared_ptr<const ExpCovKle> kle, double q_max, int level,
                   DiffusionKind kind = DiffusionKind::lognormal);

    [[nodiscard]] const ExpCovKle& kle() const noexcept { return *kle_; }
    [[nodiscard]] double q_max() const noexcept { return q_max_; }
    [[nodiscard]] int level() const noexcept { return level_; }

    /// Outflow q_h(1; u), computed via the SIMD kernels.
    [[nodiscard]] double outflow(const ParameterVector& u) const;
    /// Same quantity through the generic fem1d::solve path with pointwise
    /// field evaluation (reference implementation, slower).
    [[nodiscard]] double outflow_reference(const ParameterVector& u) const;
    /// Outflow for out.size() parameter vectors stored row-major in `points`.
    /// Systems are solved several at a time in SIMD lanes; the result agrees
    /// with outflow() up to rounding.
    void outflow_batch(std::span<const double> points, std::span<double> out) const;

    [[nodiscard]] LimitStateEvaluator evaluator() const;

private:
    std::shared_ptr<const ExpCovKle> kle_;
    double q_max_;
    int level_;
    DiffusionKind kind_;
    std::vector<double> basis_;    // σ√ν_m z_m at quadrature points
    std::vector<double> basis_1_;  // σ√ν_m z_m(1)
};

[[nodiscard]] LimitStateEvaluator make_diffusion_lsf(std::shared_ptr<const ExpCovKle> kle, double q_max, int level);

}  // namespace pfbound
