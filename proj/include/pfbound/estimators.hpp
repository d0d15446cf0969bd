#pragma once

// Estimators of P[G(U) <= 0]: reduced-dimension quadrature for the closed-
// form families, crude Monte Carlo, and sequential importance sampling.

#include "pfbound/limit_state.hpp"
#include "pfbound/ode.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace pfbound {

enum class EstimatorMethod { mc, quadrature, sis };

[[nodiscard]] std::string_view method_name(EstimatorMethod m) noexcept;

struct ProbabilityEstimate {
    double value;
    double cov;  ///< coefficient of variation; +inf when a Monte Carlo run saw no failures
    std::size_t samples_used;
    EstimatorMethod method;
    std::uint64_t seed;
};

// ------------------------------------------------------------ quadrature

/// ODE family: failure set {u <= threshold}; exact threshold -log(y_max).
struct OdeFamily {
    std::optional<OdeScheme> scheme;
    double y_max = 40.0;
};

/// BVP 2-D family: failure set {u2 <= surface(u1)}.
struct Bvp2dFamily {
    std::optional<Bvp2dDiscretization> disc;
};

using QuadratureFamily = std::variant<OdeFamily, Bvp2dFamily>;

/// ODE: Φ(threshold). BVP 2-D: adaptive Gauss–Kronrod integration of
/// Φ(u2*(u1)) φ(u1) over [-12, 12] (absolute error well below 1e-10).
[[nodiscard]] ProbabilityEstimate quadrature_pf(const QuadratureFamily& family);

// ----------------------------------------------------------- Monte Carlo

[[nodiscard]] ProbabilityEstimate monte_carlo(const LimitStateEvaluator& lsf, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------- SIS

struct SisOptions {
    std::size_t samples = 10000;
    double target_cov = 0.25;
    double seed_fraction = 0.1;
    std::size_t max_steps = 200;
    std::size_t stagnation_window = 50;
    double initial_lambda = 0.6;
    double target_acceptance = 0.44;
};

struct SisDiagnostics {
    std::vector<double> sigmas;        ///< smoothing parameter per tempering step
    std::vector<double> step_ratios;   ///< S_t = mean of the incremental weights
    std::vector<double> acceptance;    ///< mean MCMC acceptance rate per step
    std::size_t evaluations = 0;
    bool crude_monte_carlo = false;    ///< prior sample already met the target
};

struct SisResult {
    ProbabilityEstimate estimate;
    SisDiagnostics diagnostics;
};

/// Sequential importance sampling with smoothed-indicator densities
/// h_t ∝ φ(u) Φ(-G(u)/σ_t), multinomial resampling of seeds and adaptive
/// conditional-sampling MCMC (no burn-in). Deterministic in `seed`.
/// Throws ConvergenceError if σ_t stagnates or max_steps is exceeded.
[[nodiscard]] SisResult sis_run(const LimitStateEvaluator& lsf, std::uint64_t seed, const SisOptions& options = {});

[[nodiscard]] ProbabilityEstimate sis(const LimitStateEvaluator& lsf, std::size_t n = 10000, double target_cov = 0.25,
                                      std::uint64_t seed = 1, double seed_fraction = 0.1);

struct ReplicateSummary {
    std::vector<double> values;
    double mean;
    double std;       ///< sample standard deviation across replicates
    double cov;       ///< std / mean: spread of a single run
    double cov_mean;  ///< std / (mean √R): spread of the replicate average
};

/// Runs `replicates` independent SIS runs with seeds derived from (seed, r),
/// in parallel on up to `threads` threads (0 = hardware concurrency).
/// Output does not depend on the thread count.
[[nodiscard]] ReplicateSummary sis_replicates(const LimitStateEvaluator& lsf, std::size_t replicates,
                                              std::uint64_t seed, const SisOptions& options = {},
                                              unsigned threads = 0);

}  // namespace pfbound
