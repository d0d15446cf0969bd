#pragma once

// First-order reliability method: most likely failure point by the improved
// HLRF iteration with a merit-function line search.

#include "pfbound/limit_state.hpp"
#include "pfbound/parameter.hpp"

#include <optional>
#include <vector>

namespace pfbound {

struct FormOptions {
    double tol_g = 1e-8;   ///< relative to |G(0)|
    double tol_u = 1e-8;   ///< distance of u from the line spanned by ∇G, relative to max(1, ‖u‖)
    /// Floor for tol_u when ∇G comes from finite differences, whose round-off
    /// noise (~1e-8 relative for FE models) would otherwise stall the test.
    double tol_u_fd = 1e-6;
    int max_iter = 100;
    double armijo = 0.1;   ///< sufficient-decrease parameter
    double backtrack = 0.5;
    double merit_gamma = 2.0;  ///< penalty c = gamma * ‖u‖/‖∇G‖ (plus a floor)
};

struct FormResult {
    ParameterVector mlfp;
    double beta;       ///< ‖mlfp‖
    double p_form;     ///< Φ(-beta)
    int iterations;
    bool converged;
    double residual;   ///< |G(mlfp)|
    /// Merit value before and after each accepted step (same penalty per step).
    std::vector<std::pair<double, double>> merit_history;
};

/// Minimizes ½‖u‖² subject to G(u) = 0 from `start` (default 0).
/// Throws PreconditionError if G(0) <= 0 and GradientError if ∇G vanishes.
/// Non-convergence within max_iter returns a result with converged = false.
[[nodiscard]] FormResult find_mlfp(const LimitStateEvaluator& lsf, std::optional<ParameterVector> start = std::nullopt,
                                   const FormOptions& options = {});

/// ‖a.mlfp - b.mlfp‖. Throws DomainError on dimension mismatch.
[[nodiscard]] double mlfp_distance(const FormResult& a, const FormResult& b);

}  // namespace pfbound
