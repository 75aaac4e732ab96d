#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "bktflow/covariance.hpp"
#include "bktflow/rng.hpp"
#include "bktflow/special.hpp"

using namespace bkt;
using special::kPi;

namespace {

// independent oracle: heat-kernel time slice
// Gamma_j(r) = int_{L^{2j}}^{L^{2j+2}} dt e^{-r^2/4t} / (4 pi t)
double time_slice(double r, int L, int j) {
    const double t_lo = std::pow(double(L), 2.0 * j);
    const double t_hi = t_lo * double(L) * double(L);
    return special::integrate(
        [&](double t) {
            return std::exp(-r * r / (4.0 * t)) / (4.0 * kPi * t);
        },
        t_lo, t_hi, 1e-13);
}

}  // namespace

TEST_CASE("gaussian kernel matches the time-slice quadrature oracle") {
    cov::CovarianceFamily fam(16, 6, cov::CutoffFunction::gaussian(), 1e-12);
    for (int j : {0, 1, 3}) {
        for (double r : {0.5, 1.0, 7.3, 40.0, 300.0}) {
            const double oracle = time_slice(r, 16, j);
            if (oracle < 1e-300) continue;
            CHECK(fam.continuum_radial(j, r) ==
                  doctest::Approx(oracle).epsilon(1e-10));
        }
    }
}

TEST_CASE("Gamma_j(0) = ln L / 2 pi and L = 16 spot value") {
    for (int L : {8, 16, 32}) {
        cov::CovarianceFamily fam(L, 8, cov::CutoffFunction::gaussian(),
                                  1e-12);
        for (int j = 0; j <= 8; ++j)
            CHECK(std::abs(fam.continuum_radial(j, 0.0) -
                           std::log(double(L)) / (2.0 * kPi)) < 1e-12);
    }
    cov::CovarianceFamily fam16(16, 4, cov::CutoffFunction::gaussian(),
                                1e-12);
    CHECK(fam16.gamma0() == doctest::Approx(0.441271).epsilon(1e-6));
}

TEST_CASE("exact self-similarity of the continuum evaluator") {
    cov::CovarianceFamily fam(16, 8, cov::CutoffFunction::gaussian(), 1e-12);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const rng::U2 u = rng::uniforms(3, 0, k);
        const int j = 1 + k % 7;
        const double y = u.u0 * fam.radius(j) + 0.3;
        const double lhs = fam.continuum_radial(j, y);
        const double rhs =
            fam.continuum_radial(j - 1, y / 16.0);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("kernel positivity and range report for the default cutoff") {
    cov::CovarianceFamily fam(16, 4, cov::CutoffFunction::gaussian(), 1e-12);
    for (double r = 0.0; r < fam.rho_max(); r += 0.37)
        CHECK(fam.profile(r) >= -1e-12);
    // Gaussian decay trades the strict finite-range property for a
    // quantified tail; the report shows how large the violation is
    CHECK(fam.max_beyond_range() > 0.0);
    CHECK(fam.max_beyond_range() < fam.gamma0());
    CHECK(fam.profile(fam.rho_max() * 1.01) < 1e-12 * fam.gamma0());
    // positivity of the Fourier multiplier on a p-grid
    for (double p = 1e-3; p < 32.0; p *= 1.3)
        CHECK(fam.cutoff_u(16.0 * p) - fam.cutoff_u(256.0 * p) >= 0.0);
}

TEST_CASE("c~_E: fit, quadrature oracle, and L-independence") {
    // closed form of the telescoped integral: (2 ln 2 - gamma_E)/(4 pi)
    const double closed =
        (2.0 * std::log(2.0) - special::kEulerGamma) / (4.0 * kPi);
    double prev = 0.0;
    for (int L : {8, 16, 32}) {
        cov::CovarianceFamily fam(L, 8, cov::CutoffFunction::gaussian(),
                                  1e-12);
        const auto fit = fam.c_tilde_e_fit();
        CHECK(fit.residual < 1e-8);
        CHECK(fit.c_tilde_e == doctest::Approx(closed).epsilon(1e-8));
        if (L > 8) CHECK(std::abs(fit.c_tilde_e - prev) < 1e-6);
        prev = fit.c_tilde_e;
    }
    // quadrature oracle, independent of en_integral: direct 1d integral of
    // the telescoped heat slice (tail beyond t = 1e9 is ~ r^2/(16 pi 1e9))
    const double r = 37.0;
    cov::CovarianceFamily fam(16, 8, cov::CutoffFunction::gaussian(), 1e-12);
    const double direct = special::integrate(
        [&](double t) {
            return std::expm1(-r * r / (4.0 * t)) / (4.0 * kPi * t);
        },
        1.0, 1e9, 1e-13, 1e-300, 60);
    CHECK(fam.scale_sum_excess(0, r) == doctest::Approx(direct).epsilon(1e-6));
    // constant shifts drop out: only kernel differences enter the scale sum
    const double c1 =
        fam.scale_sum_excess(0, 100.0) - fam.scale_sum_excess(0, 50.0);
    CHECK(c1 == doctest::Approx(-std::log(2.0) / (2.0 * kPi)).epsilon(1e-4));
}

TEST_CASE("lattice derivatives: telescoping, scaling bound, radial slope") {
    cov::CovarianceFamily fam(8, 6, cov::CutoffFunction::gaussian(), 1e-12);
    // sum_x d^{-mu} d^{nu} Gamma_j (x) = 0 by telescoping
    for (int j : {0, 1}) {
        const std::int64_t r = std::int64_t(fam.radius(j)) + 3;
        double total = 0.0;
        for (std::int64_t x1 = -r; x1 <= r; ++x1)
            for (std::int64_t x0 = -r; x0 <= r; ++x0) {
                if (std::hypot(double(x0), double(x1)) > fam.radius(j))
                    continue;  // summand is below tol outside the disk
                total += fam.lattice_derivative(j, x0, x1,
                                                {{{-1, 0}}, {{0, 1}}});
            }
        CHECK(std::abs(total) < 1e-9);
    }
    // |d^mu Gamma_j| <= C1 L^-j with C1 measured at j = 0
    double c1 = 0.0;
    const std::int64_t r0 = std::int64_t(fam.radius(0)) + 1;
    for (std::int64_t x0 = -r0; x0 <= r0; ++x0)
        for (std::int64_t x1 = -r0; x1 <= r0; ++x1) {
            if (std::hypot(double(x0), double(x1)) > fam.radius(0)) continue;
            c1 = std::max(c1, std::abs(fam.lattice_derivative(
                                  0, x0, x1, {{{1, 0}}})));
        }
    for (int j : {1, 2, 3}) {
        const double lj = std::pow(8.0, double(j));
        double worst = 0.0;
        for (double frac : {0.1, 0.5, 1.3, 2.9}) {
            const std::int64_t x = std::int64_t(frac * lj);
            worst = std::max(worst, std::abs(fam.lattice_derivative(
                                        j, x, x / 2, {{{1, 0}}})));
        }
        CHECK(worst <= 1.05 * c1 / lj);
    }
    // first difference at j=0 vs the analytic radial derivative of the
    // heat representation, evaluated at the step midpoint
    const double rm = 5.5;
    const double analytic = special::integrate(
        [&](double t) {
            return -2.0 * rm / (4.0 * t) * std::exp(-rm * rm / (4.0 * t)) /
                   (4.0 * kPi * t);
        },
        1.0, 64.0, 1e-13);
    const double fd = fam.lattice_derivative(0, 5, 0, {{{1, 0}}});
    CHECK(std::abs(fd - analytic) < 1e-3);
    CHECK_THROWS_AS(fam.lattice_derivative(0, std::int64_t(1e7), 0, {{{1, 0}}}),
                    std::domain_error);
}

TEST_CASE("quartic cutoff: Hankel table against the K-Bessel closed form") {
    namespace fs = std::filesystem;
    fs::create_directories("test_cache");
    cov::CovarianceFamily fam(3, 4, cov::CutoffFunction::quartic(), 1e-10,
                              "test_cache");
    // Gamma_0(r) = (1/2pi)[K0(r/L) + (r/2L)K1(r/L) - K0(r) - (r/2)K1(r)]
    const auto closed = [&](double r) {
        const double L = 3.0;
        return (special::bessel_k0(r / L) +
                0.5 * (r / L) * special::bessel_k1(r / L) -
                special::bessel_k0(r) - 0.5 * r * special::bessel_k1(r)) /
               (2.0 * kPi);
    };
    CHECK(fam.gamma0() == doctest::Approx(std::log(3.0) / (2.0 * kPi))
                              .epsilon(1e-12));
    for (double r : {0.5, 1.0, 2.0, 5.0, 9.0}) {
        CHECK(fam.profile(r) == doctest::Approx(closed(r)).epsilon(2e-5));
    }
    // cached rebuild gives identical values
    cov::CovarianceFamily fam2(3, 4, cov::CutoffFunction::quartic(), 1e-10,
                               "test_cache");
    for (double r : {0.5, 2.0, 7.0})
        CHECK(fam.profile(r) == fam2.profile(r));
}

TEST_CASE("cutoff validation rejects bad inputs") {
    cov::CutoffFunction bad1{[](double p) { return 1.0 + p * p; }, "grow"};
    CHECK_THROWS_AS(cov::CovarianceFamily(16, 2, bad1, 1e-10),
                    std::domain_error);
    cov::CutoffFunction bad2{[](double p) { return std::cos(p); }, "osc"};
    CHECK_THROWS_AS(cov::CovarianceFamily(16, 2, bad2, 1e-10),
                    std::domain_error);
}
