#include "pfbound/error.hpp"
#include "pfbound/normal.hpp"

#include "doctest.h"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>

using namespace pfbound;

namespace {
// Independent oracle: Boost's normal distribution.
double phi_ref(double x) { return boost::math::cdf(boost::math::normal_distribution<double>(), x); }
}  // namespace

TEST_SUITE("normal_tools") {

TEST_CASE("cdf matches reference to 1e-12 relative on [-10, 10]") {
    for (int i = 0; i <= 2000; ++i) {
        const double x = -10.0 + 20.0 * i / 2000.0;
        const double ref = phi_ref(x);
        CHECK(std::abs(std_normal_cdf(x) - ref) <= 1e-12 * ref);
    }
}

TEST_CASE("cdf values") {
    CHECK(std_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-16));
    CHECK(std_normal_cdf(-std::log(40.0)) == doctest::Approx(1.13e-4).epsilon(0.005));
    for (double x : {0.1, 1.0, 2.5, 5.0, 8.0}) CHECK(std::abs(std_normal_cdf(x) + std_normal_cdf(-x) - 1.0) <= 1e-14);
}

TEST_CASE("cdf is monotone") {
    double prev = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double v = std_normal_cdf(-20.0 + 40.0 * i / 4000.0);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("cdf rejects non-finite input") {
    CHECK_THROWS_AS((void)std_normal_cdf(std::numeric_limits<double>::quiet_NaN()), DomainError);
    CHECK_THROWS_AS((void)std_normal_cdf(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("logcdf agrees with log of cdf and extends into the far tail") {
    for (double x : {-30.0, -10.0, -3.0, 0.0, 2.0}) CHECK(std_normal_logcdf(x) == doctest::Approx(std::log(phi_ref(x))).epsilon(1e-12));
    // Asymptotic: log Φ(x) ≈ -x²/2 - log(-x) - log√(2π) for x → -∞
    const double x = -200.0;
    const double asym = -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * M_PI) - 1.0 / (x * x);
    CHECK(std_normal_logcdf(x) == doctest::Approx(asym).epsilon(1e-10));
    CHECK(std_normal_logcdf(-std::numeric_limits<double>::infinity()) == -std::numeric_limits<double>::infinity());
    CHECK(std_normal_logcdf(std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("quantile inverts cdf") {
    for (double p : {1e-300, 1e-12, 1e-5, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-10}) {
        const double x = std_normal_quantile(p);
        CHECK(x == doctest::Approx(boost::math::quantile(boost::math::normal_distribution<double>(), p)).epsilon(1e-13));
    }
    CHECK_THROWS_AS((void)std_normal_quantile(0.0), DomainError);
    CHECK_THROWS_AS((void)std_normal_quantile(1.0), DomainError);
}

TEST_CASE("GaussianScalar") {
    const GaussianScalar g(1.0, 4.0);
    CHECK(g.stddev() == doctest::Approx(2.0));
    CHECK(g.cdf(1.0) == doctest::Approx(0.5));
    CHECK(g.cdf(-1.0) == doctest::Approx(phi_ref(-1.0)).epsilon(1e-12));
    CHECK(g.pdf(1.0) == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0 * M_PI))));
    CHECK_THROWS_AS(GaussianScalar(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(GaussianScalar(0.0, -1.0), DomainError);
}

TEST_CASE("Gordon bounds: worked values and ratio identity") {
    const CdfBracket b = cdf_bounds_gordon(-3.0, 1.0);
    CHECK(b.lower == doctest::Approx(1.3296e-3).epsilon(1e-4));
    CHECK(b.upper == doctest::Approx(1.4773e-3).epsilon(1e-4));
    CHECK(b.contains(phi_ref(-3.0)));
    const CdfBracket b10 = cdf_bounds_gordon(-10.0, 1.0);
    CHECK(std::abs(b10.upper / b10.lower - 101.0 / 100.0) <= 1e-12);
    for (double beta = 0.05; beta < 12.0; beta *= 1.3) {
        const CdfBracket g = cdf_bounds_gordon(-beta, 1.0);
        CHECK(std::abs(g.upper / g.lower - (beta * beta + 1.0) / (beta * beta)) <= 1e-12 * (beta * beta + 1.0) / (beta * beta));
    }
    CHECK_THROWS_AS((void)cdf_bounds_gordon(0.0, 1.0), DomainError);
    CHECK_THROWS_AS((void)cdf_bounds_gordon(1.0, 1.0), DomainError);
    CHECK_THROWS_AS((void)cdf_bounds_gordon(-1.0, 0.0), DomainError);
}

TEST_CASE("sharp bounds at zero and scaling") {
    const CdfBracket b = cdf_bounds_sharp(0.0, 1.0);
    CHECK(b.lower == doctest::Approx(std::sqrt(2.0 / M_PI) / 2.0).epsilon(1e-14));
    CHECK(b.upper == doctest::Approx(std::sqrt(2.0 / M_PI) / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(b.contains(0.5));
    CHECK(cdf_bounds_sharp(-3.0, 1.0).width() < cdf_bounds_gordon(-3.0, 1.0).width());
    const CdfBracket s1 = cdf_bounds_sharp(-2.0, 1.0), s2 = cdf_bounds_sharp(-20.0, 10.0);
    CHECK(s1.lower == doctest::Approx(s2.lower).epsilon(1e-14));
    CHECK(s1.upper == doctest::Approx(s2.upper).epsilon(1e-14));
    CHECK_THROWS_AS((void)cdf_bounds_sharp(0.5, 1.0), DomainError);
}

TEST_CASE("sandwich on a grid") {
    int sharp_inside = 0, total = 0;
    for (double sigma : {0.1, 1.0, 10.0}) {
        for (int i = 0; i < 1000; ++i) {
            const double w = -12.0 + (12.0 - 1e-3) * i / 999.0;
            const double p = phi_ref(w / sigma);
            const CdfBracket g = cdf_bounds_gordon(w, sigma);
            const CdfBracket s = cdf_bounds_sharp(w, sigma);
            const double slack = 1e-13 * p + 1e-300;  // subnormal results carry no relative accuracy
            CHECK(g.lower <= p + slack);
            CHECK(p <= g.upper + slack);
            CHECK(s.lower <= p + slack);
            CHECK(p <= s.upper + slack);
            ++total;
            if (g.lower <= s.lower && s.upper <= g.upper) ++sharp_inside;
        }
    }
    // On this grid the sharp bracket nests inside Gordon's everywhere.
    CHECK(sharp_inside == total);
}

}  // TEST_SUITE
