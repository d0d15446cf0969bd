// Compiled with -mavx2 -mfma; only reached through the dispatch table after
// a CPU feature check.

#include "pfbound/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace pfbound::kernels {

namespace {

void affine_combination_avx2(const double* basis, std::size_t rows, std::size_t cols,
                             const double* coeff, double offset, double* out) {
    const __m256d off = _mm256_set1_pd(offset);
    std::size_t p = 0;
    for (; p + 16 <= cols; p += 16) {
        __m256d acc0 = off, acc1 = off, acc2 = off, acc3 = off;
        for (std::size_t m = 0; m < rows; ++m) {
            const __m256d c = _mm256_set1_pd(coeff[m]);
            const double* row = basis + m * cols + p;
            acc0 = _mm256_fmadd_pd(c, _mm256_loadu_pd(row), acc0);
            acc1 = _mm256_fmadd_pd(c, _mm256_loadu_pd(row + 4), acc1);
            acc2 = _mm256_fmadd_pd(c, _mm256_loadu_pd(row + 8), acc2);
            acc3 = _mm256_fmadd_pd(c, _mm256_loadu_pd(row + 12), acc3);
        }
        _mm256_storeu_pd(out + p, acc0);
        _mm256_storeu_pd(out + p + 4, acc1);
        _mm256_storeu_pd(out + p + 8, acc2);
        _mm256_storeu_pd(out + p + 12, acc3);
    }
    for (; p + 4 <= cols; p += 4) {
        __m256d acc = off;
        for (std::size_t m = 0; m < rows; ++m) {
            acc = _mm256_fmadd_pd(_mm256_set1_pd(coeff[m]), _mm256_loadu_pd(basis + m * cols + p), acc);
        }
        _mm256_storeu_pd(out + p, acc);
    }
    for (; p < cols; ++p) {
        double acc = offset;
        for (std::size_t m = 0; m < rows; ++m) acc = std::fma(coeff[m], basis[m * cols + p], acc);
        out[p] = acc;
    }
}

// exp(x) = 2^k exp(r), x = k ln2 + r, |r| <= ln2/2. Degree-13 Taylor
// polynomial in r (truncation < 5e-18 relative), Cody–Waite split of ln2.
// Lanes outside [-708, 709] go through std::exp so overflow, underflow and
// subnormal results match the reference exactly.
inline __m256d exp_core(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);

    const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
    r = _mm256_fnmadd_pd(k, ln2_lo, r);

    constexpr double inv_fact[] = {
        1.0 / 6227020800.0,  // 1/13!
        1.0 / 479001600.0,   // 1/12!
        1.0 / 39916800.0,    // 1/11!
        1.0 / 3628800.0,     // 1/10!
        1.0 / 362880.0,      // 1/9!
        1.0 / 40320.0,       // 1/8!
        1.0 / 5040.0,        // 1/7!
        1.0 / 720.0,         // 1/6!
        1.0 / 120.0,         // 1/5!
        1.0 / 24.0,          // 1/4!
        1.0 / 6.0,           // 1/3!
        0.5,                 // 1/2!
        1.0,                 // 1/1!
        1.0,                 // 1/0!
    };
    __m256d poly = _mm256_set1_pd(inv_fact[0]);
    for (int i = 1; i < 14; ++i) poly = _mm256_fmadd_pd(poly, r, _mm256_set1_pd(inv_fact[i]));

    // 2^k through the exponent field; k is within [-1021, 1023] on the fast path.
    const __m128i k32 = _mm256_cvtpd_epi32(k);
    const __m256i k64 = _mm256_cvtepi32_epi64(k32);
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(poly, _mm256_castsi256_pd(bits));
}

// Element-wise path with the same arithmetic as the vector path, so a value's
// result does not depend on its position in the array.
double exp_scalar_fallback(double x) {
    if (!(x >= -708.0 && x <= 709.0)) return std::exp(x);
    alignas(32) double lane[4];
    _mm256_store_pd(lane, exp_core(_mm256_set1_pd(x)));
    return lane[0];
}

void exp_inplace_avx2(double* values, std::size_t count) {
    const __m256d lo = _mm256_set1_pd(-708.0);
    const __m256d hi = _mm256_set1_pd(709.0);
    std::size_t i = 0;
    // Two independent vectors per iteration to overlap the Horner chains.
    for (; i + 8 <= count; i += 8) {
        const __m256d x0 = _mm256_loadu_pd(values + i);
        const __m256d x1 = _mm256_loadu_pd(values + i + 4);
        const __m256d ok = _mm256_and_pd(_mm256_and_pd(_mm256_cmp_pd(x0, lo, _CMP_GE_OQ), _mm256_cmp_pd(x0, hi, _CMP_LE_OQ)),
                                         _mm256_and_pd(_mm256_cmp_pd(x1, lo, _CMP_GE_OQ), _mm256_cmp_pd(x1, hi, _CMP_LE_OQ)));
        if (_mm256_movemask_pd(ok) == 0xF) {
            const __m256d y0 = exp_core(x0);
            const __m256d y1 = exp_core(x1);
            _mm256_storeu_pd(values + i, y0);
            _mm256_storeu_pd(values + i + 4, y1);
        } else {
            for (std::size_t j = i; j < i + 8; ++j) values[j] = exp_scalar_fallback(values[j]);
        }
    }
    for (; i + 4 <= count; i += 4) {
        const __m256d x = _mm256_loadu_pd(values + i);
        const __m256d in_range = _mm256_and_pd(_mm256_cmp_pd(x, lo, _CMP_GE_OQ), _mm256_cmp_pd(x, hi, _CMP_LE_OQ));
        if (_mm256_movemask_pd(in_range) == 0xF) {
            _mm256_storeu_pd(values + i, exp_core(x));
        } else {
            for (std::size_t j = i; j < i + 4; ++j) values[j] = exp_scalar_fallback(values[j]);
        }
    }
    for (; i < count; ++i) values[i] = exp_scalar_fallback(values[i]);
}

void weighted_sum3_avx2(const double* a, const double* b, const double* c, double wa, double wb,
                        double wc, double* out, std::size_t count) {
    const __m256d va = _mm256_set1_pd(wa);
    const __m256d vb = _mm256_set1_pd(wb);
    const __m256d vc = _mm256_set1_pd(wc);
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        __m256d acc = _mm256_mul_pd(va, _mm256_loadu_pd(a + i));
        acc = _mm256_fmadd_pd(vb, _mm256_loadu_pd(b + i), acc);
        acc = _mm256_fmadd_pd(vc, _mm256_loadu_pd(c + i), acc);
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < count; ++i) out[i] = wa * a[i] + wb * b[i] + wc * c[i];
}

// Register tile: 4 parameter rows x 8 columns (8 accumulators). Columns are
// processed in tiles small enough for the basis block to stay in L2 while
// all batch rows sweep over it.
void affine_combination_batch_avx2(const double* basis, std::size_t rows, std::size_t cols, const double* coeff,
                                   std::size_t batch, double offset, double* out) {
    constexpr std::size_t kTileBytes = 256 * 1024;
    std::size_t tile = std::max<std::size_t>(8, (kTileBytes / (8 * std::max<std::size_t>(rows, 1))) & ~std::size_t{7});
    const __m256d off = _mm256_set1_pd(offset);
    const std::size_t full = batch - batch % 4;
    for (std::size_t p0 = 0; p0 < cols; p0 += tile) {
        const std::size_t p1 = std::min(cols, p0 + tile);
        for (std::size_t k = 0; k < full; k += 4) {
            const double* c0 = coeff + k * rows;
            const double* c1 = c0 + rows;
            const double* c2 = c1 + rows;
            const double* c3 = c2 + rows;
            std::size_t p = p0;
            for (; p + 8 <= p1; p += 8) {
                __m256d a00 = off, a01 = off, a10 = off, a11 = off, a20 = off, a21 = off, a30 = off, a31 = off;
                for (std::size_t m = 0; m < rows; ++m) {
                    const double* row = basis + m * cols + p;
                    const __m256d b0 = _mm256_loadu_pd(row);
                    const __m256d b1 = _mm256_loadu_pd(row + 4);
                    __m256d c = _mm256_broadcast_sd(c0 + m);
                    a00 = _mm256_fmadd_pd(c, b0, a00);
                    a01 = _mm256_fmadd_pd(c, b1, a01);
                    c = _mm256_broadcast_sd(c1 + m);
                    a10 = _mm256_fmadd_pd(c, b0, a10);
                    a11 = _mm256_fmadd_pd(c, b1, a11);
                    c = _mm256_broadcast_sd(c2 + m);
                    a20 = _mm256_fmadd_pd(c, b0, a20);
                    a21 = _mm256_fmadd_pd(c, b1, a21);
                    c = _mm256_broadcast_sd(c3 + m);
                    a30 = _mm256_fmadd_pd(c, b0, a30);
                    a31 = _mm256_fmadd_pd(c, b1, a31);
                }
                double* o = out + k * cols + p;
                _mm256_storeu_pd(o, a00);
                _mm256_storeu_pd(o + 4, a01);
                _mm256_storeu_pd(o + cols, a10);
                _mm256_storeu_pd(o + cols + 4, a11);
                _mm256_storeu_pd(o + 2 * cols, a20);
                _mm256_storeu_pd(o + 2 * cols + 4, a21);
                _mm256_storeu_pd(o + 3 * cols, a30);
                _mm256_storeu_pd(o + 3 * cols + 4, a31);
            }
            for (; p < p1; ++p) {
                for (std::size_t r = 0; r < 4; ++r) {
                    double acc = offset;
                    for (std::size_t m = 0; m < rows; ++m) acc = std::fma(coeff[(k + r) * rows + m], basis[m * cols + p], acc);
                    out[(k + r) * cols + p] = acc;
                }
            }
        }
        for (std::size_t k = full; k < batch; ++k) {
            std::size_t p = p0;
            for (; p + 4 <= p1; p += 4) {
                __m256d acc = off;
                for (std::size_t m = 0; m < rows; ++m) {
                    acc = _mm256_fmadd_pd(_mm256_broadcast_sd(coeff + k * rows + m), _mm256_loadu_pd(basis + m * cols + p), acc);
                }
                _mm256_storeu_pd(out + k * cols + p, acc);
            }
            for (; p < p1; ++p) {
                double acc = offset;
                for (std::size_t m = 0; m < rows; ++m) acc = std::fma(coeff[k * rows + m], basis[m * cols + p], acc);
                out[k * cols + p] = acc;
            }
        }
    }
}

inline bool pivot_ok(double d) { return d > 0.0 && std::isfinite(d); }

// G groups of four systems advance row by row together, so G independent
// division chains are in flight. Same operation order as the scalar
// reference (no contraction), hence bit-identical results.
template <int G>
bool tridiag_groups(double* diag, double* sub, double* rhs, std::size_t n, std::size_t batch, std::size_t k0) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d good = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    __m256d dprev[G], rprev[G];
    for (std::size_t i = 0; i < n; ++i) {
        for (int g = 0; g < G; ++g) {
            const std::size_t at = i * batch + k0 + 4 * static_cast<std::size_t>(g);
            __m256d d = _mm256_loadu_pd(diag + at);
            __m256d r = _mm256_loadu_pd(rhs + at);
            if (i > 0) {
                const __m256d s = _mm256_loadu_pd(sub + at);
                const __m256d l = _mm256_mul_pd(s, dprev[g]);
                d = _mm256_sub_pd(d, _mm256_mul_pd(l, s));
                r = _mm256_sub_pd(r, _mm256_mul_pd(l, rprev[g]));
                _mm256_storeu_pd(sub + at, l);
                _mm256_storeu_pd(rhs + at, r);
            }
            good = _mm256_and_pd(good, _mm256_and_pd(_mm256_cmp_pd(d, zero, _CMP_GT_OQ), _mm256_cmp_pd(d, inf, _CMP_LT_OQ)));
            const __m256d inv = _mm256_div_pd(one, d);
            _mm256_storeu_pd(diag + at, inv);
            dprev[g] = inv;
            rprev[g] = r;
        }
    }
    __m256d xnext[G];
    for (std::size_t i = n; i-- > 0;) {
        for (int g = 0; g < G; ++g) {
            const std::size_t at = i * batch + k0 + 4 * static_cast<std::size_t>(g);
            __m256d x = _mm256_mul_pd(_mm256_loadu_pd(rhs + at), _mm256_loadu_pd(diag + at));
            if (i + 1 < n) x = _mm256_sub_pd(x, _mm256_mul_pd(_mm256_loadu_pd(sub + at + batch), xnext[g]));
            _mm256_storeu_pd(rhs + at, x);
            xnext[g] = x;
        }
    }
    return _mm256_movemask_pd(good) == 0xF;
}

bool tridiag_single(double* diag, double* sub, double* rhs, std::size_t n, std::size_t batch, std::size_t k) {
    bool ok = true;
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
        ok = ok && pivot_ok(d);
        diag[at] = 1.0 / d;
    }
    for (std::size_t i = n; i-- > 0;) {
        const std::size_t at = i * batch + k;
        rhs[at] *= diag[at];
        if (i + 1 < n) rhs[at] -= sub[at + batch] * rhs[at + batch];
    }
    return ok;
}

bool tridiag_solve_batch_avx2(double* diag, double* sub, double* rhs, std::size_t n, std::size_t batch) {
    bool ok = true;
    std::size_t k = 0;
    for (; k + 8 <= batch; k += 8) ok = tridiag_groups<2>(diag, sub, rhs, n, batch, k) && ok;
    for (; k + 4 <= batch; k += 4) ok = tridiag_groups<1>(diag, sub, rhs, n, batch, k) && ok;
    for (; k < batch; ++k) ok = tridiag_single(diag, sub, rhs, n, batch, k) && ok;
    return ok;
}

// Four rows x four elements per step, then a 4x4 in-register transpose so
// each store writes one element for four consecutive systems.
void element_average_batch_avx2(const double* z, std::size_t stride, std::size_t ne, std::size_t batch,
                                const double* w, double* out) {
    const __m256d w0 = _mm256_set1_pd(w[0]);
    const __m256d w1 = _mm256_set1_pd(w[1]);
    const __m256d w2 = _mm256_set1_pd(w[2]);
    auto avg = [&](const double* a, std::size_t e) {
        __m256d acc = _mm256_mul_pd(w0, _mm256_loadu_pd(a + e));
        acc = _mm256_fmadd_pd(w1, _mm256_loadu_pd(a + ne + e), acc);
        return _mm256_fmadd_pd(w2, _mm256_loadu_pd(a + 2 * ne + e), acc);
    };
    auto avg1 = [&](const double* a, std::size_t e) { return std::fma(w[2], a[2 * ne + e], std::fma(w[1], a[ne + e], w[0] * a[e])); };
    std::size_t k = 0;
    for (; k + 4 <= batch; k += 4) {
        const double* r0 = z + k * stride;
        const double* r1 = r0 + stride;
        const double* r2 = r1 + stride;
        const double* r3 = r2 + stride;
        std::size_t e = 0;
        for (; e + 4 <= ne; e += 4) {
            const __m256d v0 = avg(r0, e), v1 = avg(r1, e), v2 = avg(r2, e), v3 = avg(r3, e);
            const __m256d t0 = _mm256_unpacklo_pd(v0, v1);  // e0: k0 k1 | e2: k0 k1
            const __m256d t1 = _mm256_unpackhi_pd(v0, v1);  // e1: k0 k1 | e3: k0 k1
            const __m256d t2 = _mm256_unpacklo_pd(v2, v3);
            const __m256d t3 = _mm256_unpackhi_pd(v2, v3);
            _mm256_storeu_pd(out + (e + 0) * batch + k, _mm256_permute2f128_pd(t0, t2, 0x20));
            _mm256_storeu_pd(out + (e + 1) * batch + k, _mm256_permute2f128_pd(t1, t3, 0x20));
            _mm256_storeu_pd(out + (e + 2) * batch + k, _mm256_permute2f128_pd(t0, t2, 0x31));
            _mm256_storeu_pd(out + (e + 3) * batch + k, _mm256_permute2f128_pd(t1, t3, 0x31));
        }
        for (; e < ne; ++e) {
            for (std::size_t j = 0; j < 4; ++j) out[e * batch + k + j] = avg1(z + (k + j) * stride, e);
        }
    }
    for (; k < batch; ++k) {
        for (std::size_t e = 0; e < ne; ++e) out[e * batch + k] = avg1(z + k * stride, e);
    }
}

}  // namespace

namespace detail {
const KernelTable avx2_table{Isa::avx2,
                             affine_combination_avx2,
                             exp_inplace_avx2,
                             weighted_sum3_avx2,
                             affine_combination_batch_avx2,
                             tridiag_solve_batch_avx2,
                             element_average_batch_avx2};
}

}  // namespace pfbound::kernels
