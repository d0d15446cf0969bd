#include "pfbound/ode.hpp"

#include "pfbound/error.hpp"

#include <cmath>

namespace pfbound {

std::string_view ode_kind_name(OdeKind kind) noexcept {
    switch (kind) {
        case OdeKind::explicit_euler: return "euler";
        case OdeKind::crank_nicolson: return "crank-nicolson";
    }
    return "unknown";
}

OdeScheme::OdeScheme(OdeKind kind, double h) : kind_(kind), h_(h), steps_(0) {
    if (!(h > 0.0) || !(h <= 1.0)) throw DomainError("OdeScheme: h must lie in (0, 1]");
    const double n = std::round(1.0 / h);
    if (std::abs(n * h - 1.0) > 1e-12) throw DomainError("OdeScheme: 1/h must be an integer");
    steps_ = static_cast<std::size_t>(n);
}

OdeScheme OdeScheme::at_level(OdeKind kind, int level) {
    if (level < 0 || level > 30) throw DomainError("OdeScheme: level must lie in [0, 30]");
    return OdeScheme(kind, std::ldexp(1.0, -level));
}

double integrate_to_one(const OdeScheme& scheme, double u) {
    if (!std::isfinite(u)) throw DomainError("integrate_to_one: non-finite parameter");
    const double h = scheme.h();
    double factor = 0.0;
    if (scheme.kind() == OdeKind::explicit_euler) {
        factor = 1.0 - u * h;
    } else {
        const double den = 1.0 + 0.5 * h * u;
        if (std::abs(den) < 1e-14) throw SingularityError("integrate_to_one: Crank-Nicolson pole at hu = -2");
        factor = (1.0 - 0.5 * h * u) / den;
    }
    double y = 1.0;
    for (std::size_t k = 0; k < scheme.steps(); ++k) y *= factor;
    return y;
}

double mlfp_closed_form(const OdeScheme& scheme, double y_max) {
    if (!(y_max > 1.0) || !std::isfinite(y_max)) throw DomainError("mlfp_closed_form: y_max must exceed 1");
    const double h = scheme.h();
    const double em1 = std::expm1(h * std::log(y_max));  // y_max^h - 1
    if (scheme.kind() == OdeKind::explicit_euler) return -em1 / h;
    return (2.0 / h) * (-em1) / (2.0 + em1);
}

}  // namespace pfbound
