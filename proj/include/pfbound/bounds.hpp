#pragma once

// A-priori bounds on the discretization error |P_f - P_{f,h}| in terms of
// the discretization error of the limit-state function, |G - G_h| <= C_FE h^s.

#include "pfbound/form.hpp"
#include "pfbound/limit_state.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pfbound {

/// h, order s and error constant C_FE of |G - G_h| <= C_FE h^s.
struct DiscretizationSpec {
    double h;
    double s;
    double c_fe;

    DiscretizationSpec(double h, double s, double c_fe);
    [[nodiscard]] double hs() const noexcept;
    [[nodiscard]] DiscretizationSpec with_c_fe(double c) const { return {h, s, c}; }
};

/// Absolute-error constant 2 C_L C_FE.
[[nodiscard]] double c1(double c_lipschitz, const DiscretizationSpec& spec);

/// (β/σ² + 1/β + 1/(βσ²) + 1/β³) C_FE, from the Mills-ratio bounds.
[[nodiscard]] double c21(double beta, double sigma, double c_fe);

/// Constant from the sharper bounds; stays finite as β → 0 (limit C_FE for σ = 1).
[[nodiscard]] double c21_sharp(double beta, double sigma, double c_fe);

/// (β + 1/β)(1/σ² + 1/(β - C h^s)²) exp((2βC h^s - C² h^{2s})/(2σ²)) C with
/// C = C_FE. Throws BoundValidityError unless h < (β/C_FE)^{1/s}.
[[nodiscard]] double c22(double beta, double sigma, const DiscretizationSpec& spec);

/// c21 + c22.
[[nodiscard]] double c2(double beta, double sigma, const DiscretizationSpec& spec);

/// 1 for n = 1, otherwise 1 + √π Γ((n+1)/2)/Γ(n/2) via log-Gamma.
[[nodiscard]] double c4(int n);

/// Largest h for which c22 is defined: (β/C_FE)^{1/s}.
[[nodiscard]] double bound_h_threshold(double beta, double s, double c_fe);

struct C3Options {
    double nu_h = 1.0;
    std::size_t samples = 100;   ///< standard-normal points for the C_FE estimate
    std::uint64_t seed = 20240611;
};

struct C3Estimate {
    double c3;
    double c_fe;            ///< declared, or the sampled max of |G - G_h|/h^s
    double gradient_ratio;  ///< max ‖∇G_h‖/(ν_h² ‖∇G‖²) over the surface points
};

/// C3 = C_FE · max_u ‖∇G_h(u)‖/(ν_h² ‖∇G(u)‖²) over `surface_points`
/// (the approximate MLFP, and optionally further points on or near ∂A).
/// If `approx` declares no C_FE, it is estimated as the max of
/// |G(u) - G_h(u)|/h^s over a seeded standard-normal sample joined with
/// `surface_points`. Throws GradientError if ∇G vanishes at a surface point.
[[nodiscard]] C3Estimate estimate_c3(const LimitStateEvaluator& exact, const LimitStateEvaluator& approx,
                                     std::span<const ParameterVector> surface_points, const C3Options& options = {});

/// Convenience overload with the single surface point mlfp_h.
[[nodiscard]] double estimate_c3(const LimitStateEvaluator& exact, const LimitStateEvaluator& approx,
                                 const ParameterVector& mlfp_h, double nu_h = 1.0);

struct BoundReport {
    double beta_h;
    int n;
    double c3;
    double c21;
    double c21_sharp;
    double c22;
    double c2;
    double c4;
    double hs;
    double bound_abs;       ///< c2(b_h, 1, C3) c4(n) h^s P^FORM_{f,h}
    double bound_rel_form;  ///< c2(b, 1, C3) h^s
    double p_form_h;
};

/// Assembles the absolute bound and the relative FORM bound with C_FE := c3.
/// `beta_exact` is the exact reliability index b if known (defaults to b_h).
/// Throws BoundValidityError if b_h - c3 h^s <= 0.
[[nodiscard]] BoundReport assemble_bounds(const FormResult& form_h, const DiscretizationSpec& spec, double c3, int n,
                                          std::optional<double> beta_exact = std::nullopt);

}  // namespace pfbound
