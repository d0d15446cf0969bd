#include "pfbound/error.hpp"
#include "pfbound/kernels.hpp"

#include <cstdlib>
#include <string>

namespace pfbound::kernels {

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(PFBOUND_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa) {
    if (!supported(isa)) {
        throw DomainError("kernel ISA '" + std::string(isa_name(isa)) + "' is not available");
    }
#if defined(PFBOUND_HAVE_AVX2)
    if (isa == Isa::avx2) return detail::avx2_table;
#endif
    return detail::scalar_table;
}

namespace {

const KernelTable& select() noexcept {
    if (const char* forced = std::getenv("PFBOUND_ISA")) {
        if (std::string_view(forced) == "scalar") return detail::scalar_table;
    }
#if defined(PFBOUND_HAVE_AVX2)
    if (supported(Isa::avx2)) return detail::avx2_table;
#endif
    return detail::scalar_table;
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw DomainError(std::string(what) + ": span size mismatch");
}

}  // namespace

const KernelTable& active() noexcept {
    static const KernelTable& chosen = select();
    return chosen;
}

void affine_combination(std::span<const double> basis, std::span<const double> coeff, double offset,
                        std::span<double> out) {
    require_same_size(basis.size(), coeff.size() * out.size(), "affine_combination");
    active().affine_combination(basis.data(), coeff.size(), out.size(), coeff.data(), offset, out.data());
}

void exp_inplace(std::span<double> values) { active().exp_inplace(values.data(), values.size()); }

void weighted_sum3(std::span<const double> a, std::span<const double> b, std::span<const double> c,
                   double wa, double wb, double wc, std::span<double> out) {
    require_same_size(a.size(), out.size(), "weighted_sum3");
    require_same_size(b.size(), out.size(), "weighted_sum3");
    require_same_size(c.size(), out.size(), "weighted_sum3");
    active().weighted_sum3(a.data(), b.data(), c.data(), wa, wb, wc, out.data(), out.size());
}

void affine_combination_batch(std::span<const double> basis, std::size_t cols, std::span<const double> coeff,
                              std::size_t batch, double offset, std::span<double> out) {
    if (cols == 0 || batch == 0) return;
    const std::size_t rows = basis.size() / cols;
    require_same_size(basis.size(), rows * cols, "affine_combination_batch");
    require_same_size(coeff.size(), batch * rows, "affine_combination_batch");
    require_same_size(out.size(), batch * cols, "affine_combination_batch");
    active().affine_combination_batch(basis.data(), rows, cols, coeff.data(), batch, offset, out.data());
}

void element_average_batch(std::span<const double> z, std::size_t stride, std::size_t ne, std::size_t batch,
                           const double (&w)[3], std::span<double> out) {
    if (batch == 0) return;
    if (stride < 3 * ne || z.size() < (batch - 1) * stride + 3 * ne) {
        throw DomainError("element_average_batch: input too small");
    }
    require_same_size(out.size(), ne * batch, "element_average_batch");
    active().element_average_batch(z.data(), stride, ne, batch, w, out.data());
}

bool tridiag_solve_batch(std::span<double> diag, std::span<double> sub, std::span<double> rhs, std::size_t n,
                         std::size_t batch) {
    require_same_size(diag.size(), n * batch, "tridiag_solve_batch");
    require_same_size(sub.size(), n * batch, "tridiag_solve_batch");
    require_same_size(rhs.size(), n * batch, "tridiag_solve_batch");
    return active().tridiag_solve_batch(diag.data(), sub.data(), rhs.data(), n, batch);
}

}  // namespace pfbound::kernels
