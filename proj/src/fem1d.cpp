#include "pfbound/fem1d.hpp"

#include "pfbound/error.hpp"
#include "pfbound/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pfbound {

const double GaussRule3::points[3] = {0.5 - 0.38729833462074168852, 0.5, 0.5 + 0.38729833462074168852};
const double GaussRule3::weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

namespace {

void require_degree(int degree) {
    if (degree != 1 && degree != 2) throw DomainError("fem1d: degree must be 1 or 2");
}

void require_unit_interval(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError(std::string(what) + ": x must lie in [0,1]");
}

// Reference basis on [0,1]: values and d/dξ.
inline void basis(int degree, double xi, double* phi, double* dphi) {
    if (degree == 1) {
        phi[0] = 1.0 - xi;
        phi[1] = xi;
        dphi[0] = -1.0;
        dphi[1] = 1.0;
    } else {
        phi[0] = (2.0 * xi - 1.0) * (xi - 1.0);
        phi[1] = 4.0 * xi * (1.0 - xi);
        phi[2] = xi * (2.0 * xi - 1.0);
        dphi[0] = 4.0 * xi - 3.0;
        dphi[1] = 4.0 - 8.0 * xi;
        dphi[2] = 4.0 * xi - 1.0;
    }
}

// Linear elements: the element stiffness only needs the quadrature average
// ā_e = Σ_g w_g a(x_{e,g}), k_e = ā_e/h [[1,-1],[-1,1]], and the lifting
// contributes ∓slope·ā_e to the two element rows.
void assemble_linear(std::span<const double> a_q, const ScalarField& f, double slope, const Mesh1D& mesh,
                     BandedSystem& sys) {
    const std::size_t ne = mesh.elements();
    const double h = mesh.h();
    std::vector<double> abar(ne);
    kernels::weighted_sum3(a_q.subspan(0, ne), a_q.subspan(ne, ne), a_q.subspan(2 * ne, ne), GaussRule3::weights[0],
                           GaussRule3::weights[1], GaussRule3::weights[2], abar);
    const double inv_h = 1.0 / h;
    // Interior row i is node i+1, shared by elements i (left) and i+1 (right).
    for (std::size_t i = 0; i < sys.n; ++i) {
        sys.band[2 * i] = (abar[i] + abar[i + 1]) * inv_h;
        if (i > 0) sys.band[2 * i + 1] = -abar[i] * inv_h;
        sys.rhs[i] = slope * (abar[i + 1] - abar[i]);
    }
    if (f) {
        for (std::size_t e = 0; e < ne; ++e) {
            double f0 = 0.0;
            double f1 = 0.0;
            for (std::size_t g = 0; g < GaussRule3::size; ++g) {
                const double xi = GaussRule3::points[g];
                const double wf = GaussRule3::weights[g] * h * f((static_cast<double>(e) + xi) * h);
                f0 += wf * (1.0 - xi);
                f1 += wf * xi;
            }
            if (e > 0) sys.rhs[e - 1] += f0;
            if (e + 1 < ne) sys.rhs[e] += f1;
        }
    }
}

}  // namespace

// ---------------------------------------------------------------- Mesh1D

Mesh1D::Mesh1D(std::size_t elements) : h_(1.0 / static_cast<double>(elements)), elements_(elements) {}

Mesh1D Mesh1D::uniform(int level) {
    if (level < 0 || level > 24) throw DomainError("Mesh1D: level must lie in [0, 24]");
    return Mesh1D(std::size_t{1} << level);
}

Mesh1D Mesh1D::with_elements(std::size_t elements) {
    if (elements < 1) throw DomainError("Mesh1D: at least one element required");
    return Mesh1D(elements);
}

double Mesh1D::node(std::size_t i) const noexcept {
    return i >= elements_ ? 1.0 : static_cast<double>(i) * h_;
}

std::vector<double> Mesh1D::nodes() const {
    std::vector<double> x(elements_ + 1);
    for (std::size_t i = 0; i <= elements_; ++i) x[i] = node(i);
    return x;
}

std::size_t Mesh1D::element_of(double x) const {
    require_unit_interval(x, "Mesh1D::element_of");
    const auto e = static_cast<std::size_t>(std::floor(x / h_));
    return std::min(e, elements_ - 1);
}

std::vector<double> quadrature_points(const Mesh1D& mesh) {
    const std::size_t ne = mesh.elements();
    std::vector<double> xq(GaussRule3::size * ne);
    for (std::size_t g = 0; g < GaussRule3::size; ++g) {
        for (std::size_t e = 0; e < ne; ++e) {
            xq[g * ne + e] = (static_cast<double>(e) + GaussRule3::points[g]) * mesh.h();
        }
    }
    return xq;
}

// ----------------------------------------------------------- BandedSystem

double BandedSystem::at(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    if (i - j > bandwidth) return 0.0;
    return band[i * (bandwidth + 1) + (i - j)];
}

double BandedSystem::residual_max(std::span<const double> x) const {
    if (x.size() != n) throw DomainError("BandedSystem::residual_max: size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = -rhs[i];
        const std::size_t lo = i > bandwidth ? i - bandwidth : 0;
        const std::size_t hi = std::min(n - 1, i + bandwidth);
        for (std::size_t j = lo; j <= hi; ++j) r += at(i, j) * x[j];
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

std::vector<double> solve_banded(BandedSystem s) {
    const std::size_t n = s.n;
    const std::size_t b = s.bandwidth;
    const std::size_t w = b + 1;
    auto L = [&](std::size_t i, std::size_t j) -> double& { return s.band[i * w + (i - j)]; };

    if (b == 1) {
        // Tridiagonal LDLᵀ with the forward sweep fused in; the diagonal
        // slot keeps 1/D_i so each row costs a single division.
        double* band = s.band.data();
        double* x = s.rhs.data();
        for (std::size_t i = 0; i < n; ++i) {
            double d = band[2 * i];
            if (i > 0) {
                const double l = band[2 * i + 1] * band[2 * (i - 1)];
                d -= l * band[2 * i + 1];
                x[i] -= l * x[i - 1];
                band[2 * i + 1] = l;
            }
            if (!(d > 0.0) || !std::isfinite(d)) {
                throw AssemblyError("solve_banded: non-positive pivot at row " + std::to_string(i) +
                                    " (matrix not positive definite)");
            }
            band[2 * i] = 1.0 / d;
        }
        for (std::size_t i = n; i-- > 0;) {
            x[i] *= band[2 * i];
            if (i + 1 < n) x[i] -= band[2 * (i + 1) + 1] * x[i + 1];
        }
        return std::move(s.rhs);
    }

    // LDLᵀ in place: diagonal slot holds D_i, off-diagonal slots hold L_ij.
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i > b ? i - b : 0;
        for (std::size_t j = lo; j < i; ++j) {
            double v = L(i, j);
            for (std::size_t k = lo; k < j; ++k) v -= L(i, k) * L(j, k) * s.band[k * w];
            L(i, j) = v / s.band[j * w];
        }
        double d = s.band[i * w];
        for (std::size_t k = lo; k < i; ++k) d -= L(i, k) * L(i, k) * s.band[k * w];
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw AssemblyError("solve_banded: non-positive pivot at row " + std::to_string(i) +
                                " (matrix not positive definite)");
        }
        s.band[i * w] = d;
    }

    std::vector<double> x = std::move(s.rhs);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i > b ? i - b : 0;
        for (std::size_t j = lo; j < i; ++j) x[i] -= L(i, j) * x[j];
    }
    for (std::size_t i = 0; i < n; ++i) x[i] /= s.band[i * w];
    for (std::size_t i = n; i-- > 0;) {
        const std::size_t hi = std::min(n - 1, i + b);
        for (std::size_t k = i + 1; k <= hi; ++k) x[i] -= L(k, i) * x[k];
    }
    return x;
}

// --------------------------------------------------------------- assembly

BandedSystem assemble(std::span<const double> a_q, const ScalarField& f, DirichletData bc, const Mesh1D& mesh,
                      int degree) {
    require_degree(degree);
    const std::size_t ne = mesh.elements();
    if (a_q.size() != GaussRule3::size * ne) throw DomainError("fem1d assemble: coefficient sample size mismatch");
    for (std::size_t q = 0; q < a_q.size(); ++q) {
        if (!(a_q[q] > 0.0) || !std::isfinite(a_q[q])) {
            const std::size_t g = q / ne;
            const std::size_t e = q % ne;
            const double x = (static_cast<double>(e) + GaussRule3::points[g]) * mesh.h();
            throw EllipticityError("fem1d: diffusion coefficient not positive at x = " + std::to_string(x));
        }
    }

    const auto deg = static_cast<std::size_t>(degree);
    const std::size_t ndof = deg * ne + 1;
    BandedSystem sys;
    sys.n = ndof - 2;
    sys.bandwidth = deg;
    sys.band.assign(sys.n * (deg + 1), 0.0);
    sys.rhs.assign(sys.n, 0.0);

    const double h = mesh.h();
    const double slope = bc.right - bc.left;  // derivative of the lifting
    if (degree == 1) {
        assemble_linear(a_q, f, slope, mesh, sys);
        return sys;
    }
    double phi[GaussRule3::size][3];
    double dphi[GaussRule3::size][3];
    for (std::size_t g = 0; g < GaussRule3::size; ++g) basis(degree, GaussRule3::points[g], phi[g], dphi[g]);

    double ke[3][3];
    double fe[3];
    for (std::size_t e = 0; e < ne; ++e) {
        for (std::size_t i = 0; i <= deg; ++i) {
            fe[i] = 0.0;
            for (std::size_t j = 0; j <= deg; ++j) ke[i][j] = 0.0;
        }
        for (std::size_t g = 0; g < GaussRule3::size; ++g) {
            const double wa = GaussRule3::weights[g] * a_q[g * ne + e];
            const double wf = f ? GaussRule3::weights[g] * h * f((static_cast<double>(e) + GaussRule3::points[g]) * h)
                                : 0.0;
            for (std::size_t i = 0; i <= deg; ++i) {
                fe[i] += wf * phi[g][i] - slope * wa * dphi[g][i];
                for (std::size_t j = 0; j <= i; ++j) ke[i][j] += wa * dphi[g][i] * dphi[g][j] / h;
            }
        }
        const std::size_t first = deg * e;
        for (std::size_t i = 0; i <= deg; ++i) {
            const std::size_t gi = first + i;
            if (gi == 0 || gi == ndof - 1) continue;
            sys.rhs[gi - 1] += fe[i];
            for (std::size_t j = 0; j <= i; ++j) {
                const std::size_t gj = first + j;
                if (gj == 0 || gj == ndof - 1) continue;
                sys.band[(gi - 1) * (deg + 1) + (gi - gj)] += ke[i][j];
            }
        }
    }
    return sys;
}

FemSolution solve(std::span<const double> a_q, ScalarField a, const ScalarField& f, DirichletData bc,
                  const Mesh1D& mesh, int degree) {
    const std::vector<double> interior = solve_banded(assemble(a_q, f, bc, mesh, degree));
    const std::size_t ndof = static_cast<std::size_t>(degree) * mesh.elements() + 1;
    const double step = mesh.h() / degree;
    std::vector<double> coef(ndof);
    for (std::size_t j = 0; j < ndof; ++j) {
        const double x = j == ndof - 1 ? 1.0 : static_cast<double>(j) * step;
        const double lift = bc.left + (bc.right - bc.left) * x;
        coef[j] = (j == 0 || j == ndof - 1) ? lift : interior[j - 1] + lift;
    }
    coef.front() = bc.left;
    coef.back() = bc.right;
    return FemSolution(mesh, degree, std::move(coef), std::move(a));
}

FemSolution solve(const ScalarField& a, const ScalarField& f, DirichletData bc, const Mesh1D& mesh, int degree) {
    if (!a) throw DomainError("fem1d solve: missing diffusion coefficient");
    std::vector<double> xq = quadrature_points(mesh);
    for (double& x : xq) x = a(x);
    return solve(xq, a, f, bc, mesh, degree);
}

// ----------------------------------------------------------- FemSolution

FemSolution::FemSolution(Mesh1D mesh, int degree, std::vector<double> coefficients, ScalarField coefficient)
    : mesh_(mesh), degree_(degree), coef_(std::move(coefficients)), a_(std::move(coefficient)) {
    require_degree(degree);
    if (coef_.size() != static_cast<std::size_t>(degree) * mesh_.elements() + 1) {
        throw DomainError("FemSolution: coefficient count does not match mesh and degree");
    }
}

double FemSolution::derivative(double x) const {
    const std::size_t e = mesh_.element_of(x);
    const double xi = (x - static_cast<double>(e) * mesh_.h()) / mesh_.h();
    double phi[3];
    double dphi[3];
    basis(degree_, xi, phi, dphi);
    const std::size_t first = static_cast<std::size_t>(degree_) * e;
    double d = 0.0;
    for (int i = 0; i <= degree_; ++i) d += coef_[first + static_cast<std::size_t>(i)] * dphi[i];
    return d / mesh_.h();
}

double point_value(const FemSolution& sol, double x) {
    const Mesh1D& mesh = sol.mesh();
    const std::size_t e = mesh.element_of(x);
    const double xi = (x - static_cast<double>(e) * mesh.h()) / mesh.h();
    double phi[3];
    double dphi[3];
    basis(sol.degree(), xi, phi, dphi);
    const std::size_t first = static_cast<std::size_t>(sol.degree()) * e;
    double v = 0.0;
    for (int i = 0; i <= sol.degree(); ++i) v += sol.coefficients()[first + static_cast<std::size_t>(i)] * phi[i];
    return v;
}

double flux(const FemSolution& sol, double x) {
    require_unit_interval(x, "flux");
    if (!sol.coefficient_field()) throw DomainError("flux: solution carries no coefficient field");
    return -sol.coefficient_field()(x) * sol.derivative(x);
}

}  // namespace pfbound
