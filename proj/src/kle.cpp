#include "pfbound/kle.hpp"

#include "pfbound/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pfbound {

namespace {

constexpr double kHalf = 0.5;  // half-length of (0,1)
constexpr double kRootTol = 1e-13;

// Bisection for a sign change of f on (lo, hi). The brackets used below are
// guaranteed by the sign pattern of the characteristic functions at kπ and
// kπ + π/2, so failure means a non-finite evaluation or an inconsistent input.
template <class F>
double bisect(F f, double lo, double hi, int mode) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (!std::isfinite(flo) || !std::isfinite(fhi) || flo * fhi > 0.0) {
        throw BracketError("build_kle: cannot bracket characteristic root of mode " + std::to_string(mode), mode);
    }
    for (int it = 0; it < 200 && hi - lo > kRootTol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ExpCovKle::ExpCovKle(double mean, double stddev, double correlation_length, std::size_t order)
    : mean_(mean), stddev_(stddev), lambda_(correlation_length) {
    if (!std::isfinite(mean)) throw DomainError("build_kle: mean must be finite");
    if (!(stddev > 0.0) || !std::isfinite(stddev)) throw DomainError("build_kle: stddev must be positive");
    if (!(correlation_length > 0.0) || !std::isfinite(correlation_length)) {
        throw DomainError("build_kle: correlation length must be positive");
    }
    if (order < 1) throw DomainError("build_kle: truncation order must be at least 1");

    const double c = 1.0 / correlation_length;
    const double pi = std::numbers::pi;
    nu_.reserve(order);
    omega_.reserve(order);
    scale_.reserve(order);
    even_.reserve(order);

    for (std::size_t idx = 0; idx < order; ++idx) {
        const int mode = static_cast<int>(idx) + 1;
        const bool even = idx % 2 == 0;
        const double k = static_cast<double>(idx / 2);
        double theta = 0.0;  // θ = ω a
        if (even) {
            // c cos θ - (θ/a) sin θ = 0 on (kπ, kπ + π/2)
            auto f = [c](double t) { return c * std::cos(t) - (t / kHalf) * std::sin(t); };
            theta = bisect(f, k * pi, k * pi + 0.5 * pi, mode);
        } else {
            // (θ/a) cos θ + c sin θ = 0 on (kπ + π/2, (k+1)π)
            auto f = [c](double t) { return (t / kHalf) * std::cos(t) + c * std::sin(t); };
            theta = bisect(f, k * pi + 0.5 * pi, (k + 1.0) * pi, mode);
        }
        const double w = theta / kHalf;
        const double nrm2 = even ? kHalf + std::sin(2.0 * theta) / (2.0 * w) : kHalf - std::sin(2.0 * theta) / (2.0 * w);
        // Value at x = 0 (shifted coordinate -a) decides the sign.
        const double at0 = even ? std::cos(theta) : -std::sin(theta);
        const double sign = at0 < 0.0 ? -1.0 : 1.0;

        nu_.push_back(2.0 * c / (w * w + c * c));
        omega_.push_back(w);
        scale_.push_back(sign / std::sqrt(nrm2));
        even_.push_back(even);
    }
}

double ExpCovKle::eigenfunction(std::size_t m, double x) const {
    const double w = omega_.at(m);
    const double xs = x - kHalf;
    return scale_[m] * (even_[m] ? std::cos(w * xs) : std::sin(w * xs));
}

double ExpCovKle::captured_variance() const noexcept {
    double s = 0.0;
    for (double v : nu_) s += v;
    return s;
}

std::vector<double> ExpCovKle::basis_table(std::span<const double> xs) const {
    std::vector<double> table(order() * xs.size());
    for (std::size_t m = 0; m < order(); ++m) {
        const double amp = stddev_ * std::sqrt(nu_[m]);
        double* row = table.data() + m * xs.size();
        for (std::size_t p = 0; p < xs.size(); ++p) row[p] = amp * eigenfunction(m, xs[p]);
    }
    return table;
}

ExpCovKle build_kle(double mean, double stddev, double correlation_length, std::size_t order) {
    return ExpCovKle(mean, stddev, correlation_length, order);
}

double field_value(const ExpCovKle& kle, const ParameterVector& u, double x) {
    if (u.size() != kle.order()) throw DomainError("field_value: parameter dimension does not match KLE order");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("field_value: x must lie in [0,1]");
    double z = kle.mean();
    for (std::size_t m = 0; m < kle.order(); ++m) {
        z += kle.stddev() * std::sqrt(kle.eigenvalue(m)) * kle.eigenfunction(m, x) * u[m];
    }
    return z;
}

double diffusion_from_field(DiffusionKind kind, double z) {
    switch (kind) {
        case DiffusionKind::tanh_shifted: return 2.0 + std::tanh(z);
        case DiffusionKind::lognormal: return std::exp(z);
    }
    throw DomainError("diffusion_from_field: unknown kind");
}

double diffusion_value(const ExpCovKle& kle, DiffusionKind kind, const ParameterVector& u, double x) {
    return diffusion_from_field(kind, field_value(kle, u, x));
}

}  // namespace pfbound
