#include "pfbound/kernels.hpp"

#include <cmath>

namespace pfbound::kernels {

namespace {

void affine_combination_scalar(const double* basis, std::size_t rows, std::size_t cols,
                               const double* coeff, double offset, double* out) {
    for (std::size_t p = 0; p < cols; ++p) out[p] = offset;
    for (std::size_t m = 0; m < rows; ++m) {
        const double c = coeff[m];
        const double* row = basis + m * cols;
        for (std::size_t p = 0; p < cols; ++p) out[p] += c * row[p];
    }
}

void exp_inplace_scalar(double* values, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) values[i] = std::exp(values[i]);
}

void weighted_sum3_scalar(const double* a, const double* b, const double* c, double wa, double wb,
                          double wc, double* out, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) out[i] = wa * a[i] + wb * b[i] + wc * c[i];
}

void affine_combination_batch_scalar(const double* basis, std::size_t rows, std::size_t cols,
                                     const double* coeff, std::size_t batch, double offset, double* out) {
    for (std::size_t k = 0; k < batch; ++k) {
        affine_combination_scalar(basis, rows, cols, coeff + k * rows, offset, out + k * cols);
    }
}

// LDLᵀ keeping 1/D_i in the diagonal slot: one division per row.
bool tridiag_solve_batch_scalar(double* diag, double* sub, double* rhs, std::size_t n, std::size_t batch) {
    bool ok = true;
    for (std::size_t k = 0; k < batch; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t at = i * batch + k;
            double d = diag[at];
            if (i > 0) {
                const std::size_t prev = at - batch;
                const double l = sub[at] * diag[prev];
                d -= l * sub[at];
                rhs[at] -= l * rhs[prev];
                sub[at] = l;
            }
            if (!(d > 0.0) || !std::isfinite(d)) ok = false;
            diag[at] = 1.0 / d;
        }
        for (std::size_t i = n; i-- > 0;) {
            const std::size_t at = i * batch + k;
            rhs[at] *= diag[at];
            if (i + 1 < n) rhs[at] -= sub[at + batch] * rhs[at + batch];
        }
    }
    return ok;
}

void element_average_batch_scalar(const double* z, std::size_t stride, std::size_t ne, std::size_t batch,
                                  const double* w, double* out) {
    for (std::size_t k = 0; k < batch; ++k) {
        const double* a = z + k * stride;
        for (std::size_t e = 0; e < ne; ++e) out[e * batch + k] = w[0] * a[e] + w[1] * a[ne + e] + w[2] * a[2 * ne + e];
    }
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::scalar,
                               affine_combination_scalar,
                               exp_inplace_scalar,
                               weighted_sum3_scalar,
                               affine_combination_batch_scalar,
                               tridiag_solve_batch_scalar,
                               element_average_batch_scalar};
}

}  // namespace pfbound::kernels
