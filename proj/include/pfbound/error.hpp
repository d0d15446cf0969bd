#pragma once

#include <stdexcept>
#include <string>

namespace pfbound {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A transcendental root could not be bracketed (KLE construction).
class BracketError : public Error {
public:
    BracketError(const std::string& what, int mode) : Error(what), mode_(mode) {}
    [[nodiscard]] int mode() const noexcept { return mode_; }

private:
    int mode_;
};

/// Diffusion coefficient not strictly positive at a quadrature point.
class EllipticityError : public Error {
public:
    using Error::Error;
};

/// Stiffness matrix is not positive definite.
class AssemblyError : public Error {
public:
    using Error::Error;
};

/// Time stepper hit a pole of its amplification factor.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Finite-difference stencil produced a non-finite value, or a gradient vanished.
class GradientError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an algorithm is violated (e.g. G(0) <= 0 for FORM).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Discretization too coarse for an error bound to be defined.
class BoundValidityError : public Error {
public:
    BoundValidityError(const std::string& what, double h_threshold)
        : Error(what), h_threshold_(h_threshold) {}
    /// Largest h for which the bound is defined.
    [[nodiscard]] double h_threshold() const noexcept { return h_threshold_; }

private:
    double h_threshold_;
};

/// An iterative method did not converge or stopped making progress.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Convergence-order fit has too few usable points.
class FitError : public Error {
public:
    using Error::Error;
};

}  // namespace pfbound
