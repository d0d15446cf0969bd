#pragma once

// Galerkin finite elements for -(a y')' = f on (0,1) with Dirichlet data,
// continuous piecewise linear (degree 1) or quadratic (degree 2) elements.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pfbound {

/// Uniform mesh of (0,1).
class Mesh1D {
public:
    /// h = 2^-level, level in [0, 24].
    [[nodiscard]] static Mesh1D uniform(int level);
    /// h = 1/elements.
    [[nodiscard]] static Mesh1D with_elements(std::size_t elements);

    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] std::size_t elements() const noexcept { return elements_; }
    [[nodiscard]] double node(std::size_t i) const noexcept;
    [[nodiscard]] std::vector<double> nodes() const;

    /// Index of the element containing x; x = 1 belongs to the last element.
    [[nodiscard]] std::size_t element_of(double x) const;

private:
    explicit Mesh1D(std::size_t elements);
    double h_;
    std::size_t elements_;
};

/// Three-point Gauss rule on the reference element [0,1].
struct GaussRule3 {
    static constexpr std::size_t size = 3;
    static const double points[3];   // ξ_g in (0,1)
    static const double weights[3];  // sum to 1
};

/// Physical quadrature points, layout [g * elements + e].
[[nodiscard]] std::vector<double> quadrature_points(const Mesh1D& mesh);

struct DirichletData {
    double left;   ///< y(0)
    double right;  ///< y(1)
};

using ScalarField = std::function<double(double)>;

class FemSolution {
public:
    FemSolution(Mesh1D mesh, int degree, std::vector<double> coefficients, ScalarField coefficient);

    [[nodiscard]] const Mesh1D& mesh() const noexcept { return mesh_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    /// Degree 1: nodal values. Degree 2: [vertex e, midpoint e, vertex e+1, ...].
    [[nodiscard]] std::span<const double> coefficients() const noexcept { return coef_; }
    [[nodiscard]] const ScalarField& coefficient_field() const noexcept { return a_; }

    /// y_h'(x) from the polynomial on element_of(x).
    [[nodiscard]] double derivative(double x) const;

private:
    Mesh1D mesh_;
    int degree_;
    std::vector<double> coef_;
    ScalarField a_;
};

/// Symmetric banded matrix (lower band stored) with right-hand side, over
/// the interior degrees of freedom.
struct BandedSystem {
    std::size_t n = 0;
    std::size_t bandwidth = 0;
    std::vector<double> band;  // band[i * (bandwidth + 1) + d] = A(i, i - d)
    std::vector<double> rhs;

    [[nodiscard]] double at(std::size_t i, std::size_t j) const;
    /// max_i |(A x - rhs)_i|
    [[nodiscard]] double residual_max(std::span<const double> x) const;
};

/// In-place banded LDLᵀ solve; throws AssemblyError on a non-positive pivot.
[[nodiscard]] std::vector<double> solve_banded(BandedSystem system);

/// Assembles the Galerkin system for the lifted problem from coefficient
/// values at the quadrature points (layout as quadrature_points). An empty
/// `f` means zero load. Throws EllipticityError if some a_q <= 0.
[[nodiscard]] BandedSystem assemble(std::span<const double> a_q, const ScalarField& f, DirichletData bc,
                                    const Mesh1D& mesh, int degree);

/// Solves -(a y')' = f, y(0) = bc.left, y(1) = bc.right.
[[nodiscard]] FemSolution solve(const ScalarField& a, const ScalarField& f, DirichletData bc, const Mesh1D& mesh,
                                int degree);

/// As above with `a` already sampled at the quadrature points; `a` is kept
/// as the solution's coefficient handle (used by flux).
[[nodiscard]] FemSolution solve(std::span<const double> a_q, ScalarField a, const ScalarField& f, DirichletData bc,
                                const Mesh1D& mesh, int degree);

/// FE interpolant at x in [0,1].
[[nodiscard]] double point_value(const FemSolution& sol, double x);

/// q_h(x) = -a(x) y_h'(x).
[[nodiscard]] double flux(const FemSolution& sol, double x);

}  // namespace pfbound
