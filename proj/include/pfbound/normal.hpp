#pragma once

// Standard-normal density, CDF and quantile, plus the Gaussian tail
// bounds used to bound the local Lipschitz constant of a normal CDF.

namespace pfbound {

/// N(mean, variance) with strictly positive variance.
class GaussianScalar {
public:
    GaussianScalar(double mean, double variance);

    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] double variance() const noexcept { return variance_; }
    [[nodiscard]] double stddev() const noexcept;
    [[nodiscard]] double pdf(double x) const;
    [[nodiscard]] double cdf(double x) const;

private:
    double mean_;
    double variance_;
};

[[nodiscard]] double std_normal_pdf(double x);

/// Φ(x) via erfc; relative accuracy better than 1e-12 on [-10, 10].
/// Throws DomainError for NaN or infinite input.
[[nodiscard]] double std_normal_cdf(double x);

/// log Φ(x), accurate far into the lower tail where Φ underflows.
/// Accepts -inf (returns -inf) and +inf (returns 0).
[[nodiscard]] double std_normal_logcdf(double x);

/// Φ⁻¹(p) for p in (0, 1) (Wichura AS241, ~1e-16 relative).
[[nodiscard]] double std_normal_quantile(double p);

/// Lower and upper bound on a probability.
struct CdfBracket {
    double lower;
    double upper;

    [[nodiscard]] double width() const noexcept { return upper - lower; }
    [[nodiscard]] bool contains(double p) const noexcept { return lower <= p && p <= upper; }
};

/// Mills-ratio bounds on F_W(w) = Φ(w/σ) for w < 0:
///   φ(t)|t|/(t²+1) <= Φ(t) <= φ(t)/|t|,  t = w/σ.
/// For σ = 1 the ratio upper/lower is (w²+1)/w².
/// Throws DomainError for w >= 0 or σ <= 0.
[[nodiscard]] CdfBracket cdf_bounds_gordon(double w, double sigma);

/// Sharper bounds of Abramowitz–Stegun type, defined for w <= 0:
///   √(2/π)e^{-t²/2}/(√(4+t²)-t) <= Φ(t) <= √(2/π)e^{-t²/2}/(√(2+t²)-t).
/// Throws DomainError for w > 0 or σ <= 0.
[[nodiscard]] CdfBracket cdf_bounds_sharp(double w, double sigma);

}  // namespace pfbound
