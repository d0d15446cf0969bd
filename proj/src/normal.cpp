#include "pfbound/normal.hpp"

#include "pfbound/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace pfbound {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void require_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError("cdf bounds: sigma must be positive and finite");
    }
}

}  // namespace

GaussianScalar::GaussianScalar(double mean, double variance) : mean_(mean), variance_(variance) {
    if (!std::isfinite(mean)) throw DomainError("GaussianScalar: non-finite mean");
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw DomainError("GaussianScalar: variance must be strictly positive");
    }
}

double GaussianScalar::stddev() const noexcept { return std::sqrt(variance_); }

double GaussianScalar::pdf(double x) const {
    const double s = stddev();
    return std_normal_pdf((x - mean_) / s) / s;
}

double GaussianScalar::cdf(double x) const { return std_normal_cdf((x - mean_) / stddev()); }

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) {
    if (!std::isfinite(x)) throw DomainError("std_normal_cdf: non-finite argument");
    return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_logcdf(double x) {
    if (std::isnan(x)) throw DomainError("std_normal_logcdf: NaN argument");
    if (x == -std::numeric_limits<double>::infinity()) return x;
    if (x == std::numeric_limits<double>::infinity()) return 0.0;
    if (x > -30.0) {
        if (x > 5.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
        return std::log(0.5 * std::erfc(-x * kInvSqrt2));
    }
    // Asymptotic Mills-ratio series; at x <= -30 the omitted term is < 1e-20.
    const double z = 1.0 / (x * x);
    const double series =
        1.0 - z * (1.0 - 3.0 * z * (1.0 - 5.0 * z * (1.0 - 7.0 * z * (1.0 - 9.0 * z))));
    return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("std_normal_quantile: p must lie in (0, 1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
                    45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r +
                    21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val = 0.0;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                   1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                   0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                   0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                   7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

CdfBracket cdf_bounds_gordon(double w, double sigma) {
    require_sigma(sigma);
    if (!(w < 0.0) || !std::isfinite(w)) {
        throw DomainError("cdf_bounds_gordon: bounds are only defined for negative w");
    }
    const double t = w / sigma;
    const double dens = std_normal_pdf(t);
    return {dens * (-t) / (t * t + 1.0), dens / (-t)};
}

CdfBracket cdf_bounds_sharp(double w, double sigma) {
    require_sigma(sigma);
    if (!(w <= 0.0) || !std::isfinite(w)) {
        throw DomainError("cdf_bounds_sharp: bounds are only defined for w <= 0");
    }
    const double t = w / sigma;
    const double scale = std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * t * t);
    return {scale / (std::sqrt(4.0 + t * t) - t), scale / (std::sqrt(2.0 + t * t) - t)};
}

}  // namespace pfbound
