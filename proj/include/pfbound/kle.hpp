#pragma once

// Karhunen–Loève expansion of a stationary Gaussian field on (0,1) with
// covariance σ² exp(-|x-y|/λ), and the diffusion coefficients built from it.

#include "pfbound/parameter.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace pfbound {

enum class DiffusionKind {
    tanh_shifted,  ///< a = 2 + tanh(Z), values in (1, 3)
    lognormal,     ///< a = exp(Z)
};

/// Truncated KLE  Z_n(x) = μ + σ Σ_m √ν_m z_m(x) u_m.
///
/// Eigenpairs come from the closed-form characteristic equations of the
/// exponential kernel: with half-length a = 1/2 and c = 1/λ, the even
/// eigenfunctions cos(ω(x-½)) satisfy c cos(ωa) = ω sin(ωa), the odd ones
/// sin(ω(x-½)) satisfy ω cos(ωa) = -c sin(ωa), and ν = 2c/(ω² + c²).
/// Modes alternate even/odd and are sorted by decreasing ν.
/// Immutable after construction.
class ExpCovKle {
public:
    ExpCovKle(double mean, double stddev, double correlation_length, std::size_t order);

    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] double stddev() const noexcept { return stddev_; }
    [[nodiscard]] double correlation_length() const noexcept { return lambda_; }
    [[nodiscard]] std::size_t order() const noexcept { return nu_.size(); }

    /// ν_1 >= ν_2 >= ... (0-based index).
    [[nodiscard]] std::span<const double> eigenvalues() const noexcept { return nu_; }
    [[nodiscard]] double eigenvalue(std::size_t m) const { return nu_.at(m); }
    /// Angular frequency ω_m of mode m.
    [[nodiscard]] double frequency(std::size_t m) const { return omega_.at(m); }

    /// L²(0,1)-normalized eigenfunction z_m(x), sign fixed so z_m(0) >= 0.
    [[nodiscard]] double eigenfunction(std::size_t m, double x) const;

    /// Σ ν_m: fraction of the pointwise variance captured by the truncation.
    [[nodiscard]] double captured_variance() const noexcept;

    /// Row-major table B[m * xs.size() + p] = σ √ν_m z_m(xs[p]), so that
    /// Z_n(xs[p]) = μ + Σ_m B[m, p] u_m.
    [[nodiscard]] std::vector<double> basis_table(std::span<const double> xs) const;

private:
    double mean_;
    double stddev_;
    double lambda_;
    std::vector<double> nu_;
    std::vector<double> omega_;
    std::vector<double> scale_;  // normalization times sign
    std::vector<bool> even_;
};

/// Builds the expansion; throws DomainError for σ <= 0, λ <= 0, n < 1 and
/// BracketError (carrying the 1-based mode index) if a root cannot be bracketed.
[[nodiscard]] ExpCovKle build_kle(double mean, double stddev, double correlation_length, std::size_t order);

/// μ + σ Σ √ν_m z_m(x) u_m. Throws DomainError on dimension mismatch or x outside [0,1].
[[nodiscard]] double field_value(const ExpCovKle& kle, const ParameterVector& u, double x);

[[nodiscard]] double diffusion_value(const ExpCovKle& kle, DiffusionKind kind, const ParameterVector& u, double x);

/// Applies the transform of `kind` to a field value.
[[nodiscard]] double diffusion_from_field(DiffusionKind kind, double z);

}  // namespace pfbound
