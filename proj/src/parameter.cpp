#include "pfbound/parameter.hpp"

#include "pfbound/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pfbound {

namespace {

void validate(const std::vector<double>& c) {
    if (c.empty()) throw DomainError("ParameterVector: dimension must be at least 1");
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!std::isfinite(c[i])) {
            throw DomainError("ParameterVector: component " + std::to_string(i) + " is not finite");
        }
    }
}

}  // namespace

ParameterVector::ParameterVector(std::vector<double> components) : c_(std::move(components)) { validate(c_); }

ParameterVector::ParameterVector(std::initializer_list<double> components) : c_(components) { validate(c_); }

ParameterVector ParameterVector::zeros(std::size_t n) { return ParameterVector(std::vector<double>(n, 0.0)); }

double ParameterVector::norm() const noexcept { return norm2(c_); }

ParameterVector ParameterVector::with(std::size_t i, double value) const {
    std::vector<double> c = c_;
    c.at(i) = value;
    return ParameterVector(std::move(c));
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) {
    // Scaled to avoid overflow for large components.
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (double v : a) s += (v / scale) * (v / scale);
    return scale * std::sqrt(s);
}

}  // namespace pfbound
