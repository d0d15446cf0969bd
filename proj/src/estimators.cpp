#include "pfbound/estimators.hpp"

#include "pfbound/error.hpp"
#include "pfbound/normal.hpp"
#include "pfbound/random.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

namespace pfbound {

std::string_view method_name(EstimatorMethod m) noexcept {
    switch (m) {
        case EstimatorMethod::mc: return "mc";
        case EstimatorMethod::quadrature: return "quadrature";
        case EstimatorMethod::sis: return "sis";
    }
    return "unknown";
}

// ------------------------------------------------------------ quadrature

namespace {

struct QuadratureVisitor {
    ProbabilityEstimate operator()(const OdeFamily& f) const {
        const double threshold = f.scheme ? mlfp_closed_form(*f.scheme, f.y_max) : -std::log(f.y_max);
        return {std_normal_cdf(threshold), 0.0, 0, EstimatorMethod::quadrature, 0};
    }

    ProbabilityEstimate operator()(const Bvp2dFamily& f) const {
        const Bvp2dModel model(f.disc);
        auto integrand = [&model](double u1) {
            return std::exp(std_normal_logcdf(model.surface(u1))) * std_normal_pdf(u1);
        };
        // Relative tolerance 1e-12 on a value of order 1e-4 is far inside the
        // 1e-10 absolute target; max_depth bounds the adaptive bisection.
        double err = 0.0;
        const double value =
            boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -12.0, 12.0, 20, 1e-12, &err);
        if (!(err <= 1e-10)) throw ConvergenceError("quadrature_pf: bvp2d integral did not reach 1e-10 accuracy");
        return {value, 0.0, 0, EstimatorMethod::quadrature, 0};
    }
};

double sample_cov(std::span<const double> w) {
    const auto n = static_cast<double>(w.size());
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= n;
    if (!(mean > 0.0)) return std::numeric_limits<double>::infinity();
    double ss = 0.0;
    for (double v : w) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (n - 1.0)) / mean;
}

// cov of exp(lw) computed with a max shift (scale invariant).
double log_weight_cov(std::span<const double> lw, std::vector<double>& scratch) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : lw) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return std::numeric_limits<double>::infinity();
    scratch.resize(lw.size());
    for (std::size_t k = 0; k < lw.size(); ++k) scratch[k] = std::exp(lw[k] - mx);
    return sample_cov(scratch);
}

}  // namespace

ProbabilityEstimate quadrature_pf(const QuadratureFamily& family) { return std::visit(QuadratureVisitor{}, family); }

// ----------------------------------------------------------- Monte Carlo

ProbabilityEstimate monte_carlo(const LimitStateEvaluator& lsf, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw DomainError("monte_carlo: N must be at least 1");
    RandomStream rng(seed, {0x4D43});
    constexpr std::size_t kChunk = 256;
    std::vector<double> pts(kChunk * lsf.dim()), g(kChunk);
    std::size_t fails = 0;
    for (std::size_t k0 = 0; k0 < n; k0 += kChunk) {
        const std::size_t b = std::min(kChunk, n - k0);
        for (std::size_t i = 0; i < b * lsf.dim(); ++i) pts[i] = rng.normal();
        lsf.evaluate_batch({pts.data(), b * lsf.dim()}, {g.data(), b});
        for (std::size_t k = 0; k < b; ++k) fails += g[k] <= 0.0 ? 1 : 0;
    }
    const double p = static_cast<double>(fails) / static_cast<double>(n);
    const double cov = fails > 0 ? std::sqrt((1.0 - p) / (static_cast<double>(n) * p))
                                 : std::numeric_limits<double>::infinity();
    return {p, cov, n, EstimatorMethod::mc, seed};
}

// ---------------------------------------------------------------- SIS

namespace {

constexpr std::uint64_t kPriorStream = 0x5052;
constexpr std::uint64_t kResampleStream = 0x5253;

struct Population {
    std::size_t dim;
    std::vector<double> u;  // row-major, N x dim
    std::vector<double> g;
    [[nodiscard]] std::size_t size() const noexcept { return g.size(); }
    [[nodiscard]] std::span<const double> row(std::size_t k) const { return {u.data() + k * dim, dim}; }
};

double log_smooth(double g, double sigma) { return std_normal_logcdf(-g / sigma); }

}  // namespace

SisResult sis_run(const LimitStateEvaluator& lsf, std::uint64_t seed, const SisOptions& opt) {
    const std::size_t n = opt.samples;
    const std::size_t dim = lsf.dim();
    if (n < 100) throw DomainError("sis: at least 100 samples required");
    if (!(opt.target_cov > 0.0)) throw DomainError("sis: target cov must be positive");
    if (!(opt.seed_fraction > 0.0 && opt.seed_fraction <= 1.0)) throw DomainError("sis: seed fraction must lie in (0,1]");

    SisDiagnostics diag;
    auto evaluate = [&](std::span<const double> pts, std::span<double> out) {
        diag.evaluations += out.size();
        lsf.evaluate_batch(pts, out);
    };

    // Prior sample.
    Population pop{dim, std::vector<double>(n * dim), std::vector<double>(n)};
    {
        RandomStream rng(seed, {kPriorStream});
        for (double& v : pop.u) v = rng.normal();
        evaluate(pop.u, pop.g);
    }
    std::vector<double> indicator(n);
    for (std::size_t k = 0; k < n; ++k) indicator[k] = pop.g[k] <= 0.0 ? 1.0 : 0.0;
    if (sample_cov(indicator) <= opt.target_cov) {
        double p = 0.0;
        for (double v : indicator) p += v;
        p /= static_cast<double>(n);
        diag.crude_monte_carlo = true;
        return {{p, std::sqrt((1.0 - p) / (static_cast<double>(n) * p)), diag.evaluations, EstimatorMethod::sis, seed},
                diag};
    }

    const std::size_t n_seeds = static_cast<std::size_t>(std::ceil(opt.seed_fraction * static_cast<double>(n)));
    const std::size_t adapt_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.1 * n_seeds)));

    std::vector<double> log_prev(n, 0.0);  // log Φ(-G/σ_{t-1}); the prior has weight 1
    double sigma_prev = std::numeric_limits<double>::infinity();
    double log_product = 0.0;
    std::vector<double> lw(n);
    std::vector<double> scratch;

    for (std::size_t t = 1; t <= opt.max_steps; ++t) {
        // --- smoothing parameter: weight cov equals the target
        auto weights_at = [&](double log_sigma) {
            const double s = std::exp(log_sigma);
            for (std::size_t k = 0; k < n; ++k) lw[k] = log_smooth(pop.g[k], s) - log_prev[k];
            return log_weight_cov(lw, scratch);
        };
        double hi = 0.0;
        if (std::isinf(sigma_prev)) {
            double gmax = 0.0;
            for (double g : pop.g) gmax = std::max(gmax, std::abs(g));
            hi = std::log(1e6 * (gmax + 1.0));
        } else {
            hi = std::log(sigma_prev);
        }
        double lo = hi - 40.0;
        double log_sigma = lo;
        if (weights_at(lo) > opt.target_cov) {
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (weights_at(mid) > opt.target_cov) lo = mid; else hi = mid;
            }
            log_sigma = hi;
        }
        const double sigma = std::exp(log_sigma);
        if (!(sigma > 1e-300)) throw ConvergenceError("sis: smoothing parameter underflowed");
        weights_at(log_sigma);

        double mx = -std::numeric_limits<double>::infinity();
        for (double v : lw) mx = std::max(mx, v);
        std::vector<double> w(n);
        double wsum = 0.0;
        for (std::size_t k = 0; k < n; ++k) wsum += (w[k] = std::exp(lw[k] - mx));
        const double step_ratio = std::exp(mx) * wsum / static_cast<double>(n);
        log_product += std::log(step_ratio);
        diag.sigmas.push_back(sigma);
        diag.step_ratios.push_back(step_ratio);

        if (diag.sigmas.size() > opt.stagnation_window) {
            const double old = diag.sigmas[diag.sigmas.size() - 1 - opt.stagnation_window];
            if (old / sigma < 1.0 + 1e-6) {
                throw ConvergenceError("sis: tempering stagnated (smoothing parameter unchanged over " +
                                       std::to_string(opt.stagnation_window) + " steps)");
            }
        }

        // --- weighted moments for the proposal spread
        std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double p = w[k] / wsum;
            for (std::size_t i = 0; i < dim; ++i) mean[i] += p * pop.u[k * dim + i];
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double p = w[k] / wsum;
            for (std::size_t i = 0; i < dim; ++i) {
                const double d = pop.u[k * dim + i] - mean[i];
                sd[i] += p * d * d;
            }
        }
        for (double& v : sd) v = std::sqrt(v);

        // --- multinomial resampling of the seeds
        std::vector<double> cdf(n);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) cdf[k] = (acc += w[k] / wsum);
        std::vector<std::size_t> seeds(n_seeds);
        {
            RandomStream rng(seed, {t, kResampleStream});
            for (auto& s : seeds) {
                const double r = rng.uniform() * acc;
                s = std::min<std::size_t>(n - 1, std::upper_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
            }
        }

        // --- adaptive conditional sampling, chains run from each seed
        Population next{dim, std::vector<double>(n * dim), std::vector<double>(n)};
        std::vector<double> next_log(n);
        double lambda = opt.initial_lambda;
        std::size_t adapt_count = 0;
        std::size_t total_accept = 0;
        std::vector<double> sig(dim), rho(dim);
        auto set_spread = [&] {
            for (std::size_t i = 0; i < dim; ++i) {
                sig[i] = std::min(lambda * sd[i], 1.0);
                rho[i] = std::sqrt(1.0 - sig[i] * sig[i]);
            }
        };
        set_spread();
        // Chains of one adaptation batch share λ and are independent, so they
        // advance in lockstep and their candidates are evaluated together; the
        // result equals running the chains one after another.
        const std::size_t base_len = n / n_seeds;
        const std::size_t extra = n % n_seeds;
        auto chain_len = [&](std::size_t c) { return base_len + (c < extra ? 1 : 0); };
        auto chain_start = [&](std::size_t c) { return c * base_len + std::min(c, extra); };
        for (std::size_t c0 = 0; c0 < n_seeds; c0 += adapt_every) {
            const std::size_t nb = std::min(adapt_every, n_seeds - c0);
            std::vector<RandomStream> rngs;
            rngs.reserve(nb);
            std::vector<double> cur_u(nb * dim), cur_g(nb), cur_l(nb);
            for (std::size_t j = 0; j < nb; ++j) {
                rngs.emplace_back(seed, std::initializer_list<std::uint64_t>{t, c0 + j + 1});
                const std::size_t src = seeds[c0 + j];
                std::copy_n(pop.u.begin() + static_cast<std::ptrdiff_t>(src * dim), dim,
                            cur_u.begin() + static_cast<std::ptrdiff_t>(j * dim));
                cur_g[j] = pop.g[src];
                cur_l[j] = log_smooth(cur_g[j], sigma);
            }
            std::vector<double> cand_u(nb * dim), cand_g(nb), uni(nb);
            std::vector<std::size_t> live;
            std::size_t batch_accept = 0;
            std::size_t batch_moves = 0;
            for (std::size_t m = 0; m < base_len + 1; ++m) {
                live.clear();
                for (std::size_t j = 0; j < nb; ++j) {
                    if (m < chain_len(c0 + j)) live.push_back(j);
                }
                if (live.empty()) break;
                // Fixed draw consumption per move: dim normals, then one uniform.
                std::vector<double> pts(live.size() * dim);
                for (std::size_t q = 0; q < live.size(); ++q) {
                    const std::size_t j = live[q];
                    for (std::size_t i = 0; i < dim; ++i) {
                        pts[q * dim + i] = rho[i] * cur_u[j * dim + i] + sig[i] * rngs[j].normal();
                    }
                    uni[j] = rngs[j].uniform();
                }
                std::vector<double> g(live.size());
                evaluate(pts, g);
                for (std::size_t q = 0; q < live.size(); ++q) {
                    const std::size_t j = live[q];
                    const double l_cand = log_smooth(g[q], sigma);
                    if (std::log(uni[j]) < l_cand - cur_l[j]) {
                        std::copy_n(pts.begin() + static_cast<std::ptrdiff_t>(q * dim), dim,
                                    cur_u.begin() + static_cast<std::ptrdiff_t>(j * dim));
                        cur_g[j] = g[q];
                        cur_l[j] = l_cand;
                        ++batch_accept;
                    }
                    ++batch_moves;
                    const std::size_t slot = chain_start(c0 + j) + m;
                    std::copy_n(cur_u.begin() + static_cast<std::ptrdiff_t>(j * dim), dim,
                                next.u.begin() + static_cast<std::ptrdiff_t>(slot * dim));
                    next.g[slot] = cur_g[j];
                    next_log[slot] = cur_l[j];
                }
            }
            total_accept += batch_accept;
            if (nb == adapt_every && batch_moves > 0) {
                ++adapt_count;
                const double rate = static_cast<double>(batch_accept) / static_cast<double>(batch_moves);
                lambda = std::exp(std::log(lambda) + (rate - opt.target_acceptance) / std::sqrt(double(adapt_count)));
                set_spread();
            }
        }
        diag.acceptance.push_back(static_cast<double>(total_accept) / static_cast<double>(n));
        pop = std::move(next);
        log_prev = std::move(next_log);
        sigma_prev = sigma;

        // --- stop once the final importance weights meet the target
        std::vector<double> wf(n);
        for (std::size_t k = 0; k < n; ++k) wf[k] = pop.g[k] <= 0.0 ? std::exp(-log_prev[k]) : 0.0;
        const double cov_final = sample_cov(wf);
        if (cov_final <= opt.target_cov) {
            double m = 0.0;
            for (double v : wf) m += v;
            m /= static_cast<double>(n);
            const double value = std::exp(log_product) * m;
            return {{value, cov_final / std::sqrt(static_cast<double>(n)), diag.evaluations, EstimatorMethod::sis, seed},
                    diag};
        }
    }
    throw ConvergenceError("sis: no convergence within " + std::to_string(opt.max_steps) + " tempering steps");
}

ProbabilityEstimate sis(const LimitStateEvaluator& lsf, std::size_t n, double target_cov, std::uint64_t seed,
                        double seed_fraction) {
    SisOptions opt;
    opt.samples = n;
    opt.target_cov = target_cov;
    opt.seed_fraction = seed_fraction;
    return sis_run(lsf, seed, opt).estimate;
}

ReplicateSummary sis_replicates(const LimitStateEvaluator& lsf, std::size_t replicates, std::uint64_t seed,
                                const SisOptions& options, unsigned threads) {
    if (replicates < 1) throw DomainError("sis_replicates: at least one replicate required");
    std::vector<double> values(replicates);
    std::vector<std::exception_ptr> errors(replicates);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r; (r = next.fetch_add(1)) < replicates;) {
            try {
                values[r] = sis_run(lsf, derive_seed(seed, {r}), options).estimate.value;
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    unsigned nt = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    nt = static_cast<unsigned>(std::min<std::size_t>(nt, replicates));
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < nt; ++i) pool.emplace_back(worker);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    ReplicateSummary s{values, 0.0, 0.0, 0.0, 0.0};
    const auto r = static_cast<double>(replicates);
    for (double v : values) s.mean += v;
    s.mean /= r;
    if (replicates > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / (r - 1.0));
    }
    s.cov = s.mean > 0.0 ? s.std / s.mean : std::numeric_limits<double>::infinity();
    s.cov_mean = s.cov / std::sqrt(r);
    return s;
}

}  // namespace pfbound
