#pragma once

// Data-parallel inner loops behind the random-field finite-element model.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The active table is chosen once at first use from the
// CPU feature flags; setting PFBOUND_ISA=scalar in the environment forces
// the reference kernels.

#include <cstddef>
#include <span>
#include <string_view>

namespace pfbound::kernels {

enum class Isa { scalar, avx2 };

[[nodiscard]] std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
    Isa isa;

    /// out[p] = offset + sum_m coeff[m] * basis[m * cols + p], p < cols.
    void (*affine_combination)(const double* basis, std::size_t rows, std::size_t cols,
                               const double* coeff, double offset, double* out);

    /// values[i] = exp(values[i]).
    void (*exp_inplace)(double* values, std::size_t count);

    /// out[i] = wa * a[i] + wb * b[i] + wc * c[i].
    void (*weighted_sum3)(const double* a, const double* b, const double* c, double wa, double wb,
                          double wc, double* out, std::size_t count);

    /// out[k * cols + p] = offset + sum_m coeff[k * rows + m] * basis[m * cols + p], k < batch.
    void (*affine_combination_batch)(const double* basis, std::size_t rows, std::size_t cols,
                                     const double* coeff, std::size_t batch, double offset, double* out);

    /// Solves `batch` symmetric tridiagonal systems of size n in place by LDLᵀ.
    /// Storage is interleaved, entry i of system k at [i * batch + k]:
    /// diag = A(i,i), sub = A(i,i-1) (row 0 ignored), rhs is overwritten by the
    /// solution; diag and sub are destroyed. Returns false if some pivot is
    /// not positive and finite (the affected systems hold garbage).
    bool (*tridiag_solve_batch)(double* diag, double* sub, double* rhs, std::size_t n, std::size_t batch);

    /// Three-point quadrature averages of `batch` rows of z (row k starts at
    /// k * stride and holds [g * ne + e] blocks), written interleaved:
    /// out[e * batch + k] = w[0] z_k[e] + w[1] z_k[ne + e] + w[2] z_k[2 ne + e].
    void (*element_average_batch)(const double* z, std::size_t stride, std::size_t ne, std::size_t batch,
                                  const double* w, double* out);
};

/// True if the running CPU (and this build) can execute `isa`.
[[nodiscard]] bool supported(Isa isa) noexcept;

/// Kernel table for a specific ISA. Throws DomainError if unsupported.
[[nodiscard]] const KernelTable& table(Isa isa);

/// Runtime-selected table.
[[nodiscard]] const KernelTable& active() noexcept;

// Span front-ends over the active table.

/// `basis` is row-major with `coeff.size()` rows of `out.size()` columns.
void affine_combination(std::span<const double> basis, std::span<const double> coeff, double offset,
                        std::span<double> out);

void exp_inplace(std::span<double> values);

void weighted_sum3(std::span<const double> a, std::span<const double> b, std::span<const double> c,
                   double wa, double wb, double wc, std::span<double> out);

/// `coeff` holds `batch` rows of basis.size()/cols coefficients; out is batch x cols.
void affine_combination_batch(std::span<const double> basis, std::size_t cols, std::span<const double> coeff,
                              std::size_t batch, double offset, std::span<double> out);

void element_average_batch(std::span<const double> z, std::size_t stride, std::size_t ne, std::size_t batch,
                           const double (&w)[3], std::span<double> out);

[[nodiscard]] bool tridiag_solve_batch(std::span<double> diag, std::span<double> sub, std::span<double> rhs,
                                       std::size_t n, std::size_t batch);

namespace detail {
extern const KernelTable scalar_table;
#if defined(PFBOUND_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace pfbound::kernels
