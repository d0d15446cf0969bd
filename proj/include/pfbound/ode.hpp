#pragma once

// One-step integrators for the scalar test problem y' = -u y, y(0) = 1.

#include <cstddef>
#include <string_view>

namespace pfbound {

enum class OdeKind { explicit_euler, crank_nicolson };

[[nodiscard]] std::string_view ode_kind_name(OdeKind kind) noexcept;

/// Scheme with step h such that 1/h is a positive integer.
class OdeScheme {
public:
    OdeScheme(OdeKind kind, double h);
    /// h = 2^-level.
    [[nodiscard]] static OdeScheme at_level(OdeKind kind, int level);

    [[nodiscard]] OdeKind kind() const noexcept { return kind_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
    /// Convergence order of the global error (1 or 2).
    [[nodiscard]] double order() const noexcept { return kind_ == OdeKind::explicit_euler ? 1.0 : 2.0; }

private:
    OdeKind kind_;
    double h_;
    std::size_t steps_;
};

/// y_h(1) by time stepping. Throws SingularityError at the Crank–Nicolson
/// pole 1 + hu/2 = 0.
[[nodiscard]] double integrate_to_one(const OdeScheme& scheme, double u);

/// Threshold u_h with {y_h(1; u) >= y_max} = {u <= u_h} near the exact
/// threshold -log(y_max):
///   Euler (1 - y_max^h)/h,  Crank–Nicolson (2/h)(1 - y_max^h)/(1 + y_max^h).
/// Requires y_max > 1.
[[nodiscard]] double mlfp_closed_form(const OdeScheme& scheme, double y_max);

}  // namespace pfbound
