#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bktflow/correlation.hpp"
#include "bktflow/special.hpp"

using namespace bkt;
using special::kPi;

namespace {

const double kAlpha2 = 8.0 * kPi;

coeff::CoefficientTable zero_table(double eta) {
    coeff::CoefficientTable t;
    t.L = 16;
    t.alpha2 = kAlpha2;
    t.eta = eta;
    t.cutoff_label = "gauss";
    t.j_freeze = 0;
    t.rows.push_back({});
    return t;
}

struct Fixture {
    cov::CovarianceFamily fam{16, 10, cov::CutoffFunction::gaussian(), 1e-12};
    coeff::CoefficientTable table = make_table();
    flow::ShootResult shot = make_shot();
    charge::ChargeTrajectory ctraj = charge::run_charge_flow(
        shot.trajectory, table, fam, kAlpha2, 0.5, 250);

    coeff::CoefficientTable make_table() const {
        coeff::Options opt;
        opt.alpha2 = kAlpha2;
        opt.eta = 0.5;
        opt.j_max = 8;
        opt.j_freeze = 8;
        return coeff::build_coefficient_table(fam, opt);
    }
    flow::ShootResult make_shot() {
        flow::ShootOptions so;
        so.j_max = 260;
        return flow::shoot_separatrix(1e-3, table, fam, kAlpha2, so);
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

charge::ChargeTrajectory free_flow(const cov::CovarianceFamily& fam,
                                   double eta, int j_end) {
    const auto t = zero_table(eta);
    const auto coupling = flow::run_flow(0.0, 0.0, t, fam, kAlpha2, j_end);
    return charge::run_charge_flow(coupling, t, fam, kAlpha2, eta, j_end);
}

}  // namespace

TEST_CASE("free flow reproduces the exact z = 0 decay") {
    auto& f = fixture();
    for (double eta : {0.3, 0.5}) {
        const auto traj = free_flow(f.fam, eta, 40);
        // Z_n = L^{2n(1-eta^2)} exactly
        for (int n : {1, 5, 9}) {
            CHECK(traj.states[std::size_t(n)].z.log_abs ==
                  doctest::Approx(2.0 * n * (1.0 - eta * eta) *
                                  std::log(16.0))
                      .epsilon(1e-12));
        }
        // 2 w2a(x) ~ e^{eta^2 a2 Gamma_{inf,0}(x|0)} within 1% for x >= 50
        for (double x : {50.0, 400.0, 3000.0}) {
            const double lhs =
                2.0 * corr::w2a_series(x, traj, f.fam, kAlpha2, eta, false);
            const double rhs = std::exp(eta * eta * kAlpha2 *
                                        f.fam.scale_sum_excess(0, x));
            CHECK(lhs == doctest::Approx(rhs).epsilon(0.01));
        }
    }
}

TEST_CASE("epifanio two-series rewrite matches the direct sum exactly") {
    auto& f = fixture();
    const double eta = 0.5, x = 500.0;
    const auto& traj = f.ctraj;
    const double q2a2 = eta * eta * kAlpha2;
    double direct = 0.0, series1 = 0.0, series2 = 0.0;
    for (int n = 0; n <= 240; ++n) {
        const auto& zn = traj.states[std::size_t(n)].z;
        const double zn2 = std::exp(2.0 * zn.log_abs -
                                    4.0 * double(n) * std::log(16.0));
        const double exc_n = f.fam.scale_sum_excess(n, x);
        const double exc_n1 = f.fam.scale_sum_excess(n + 1, x);
        const double gn = f.fam.continuum_radial(n, x);
        direct += 0.5 * zn2 * std::exp(q2a2 * exc_n1 - q2a2 * f.fam.gamma0()) *
                  std::expm1(q2a2 * gn);
        series1 += 0.5 * zn2 * std::exp(q2a2 * exc_n);
        series2 += 0.5 * zn2 * std::exp(-q2a2 * f.fam.gamma0()) *
                   std::exp(q2a2 * exc_n1);
    }
    CHECK(direct ==
          doctest::Approx(series1 - series2).epsilon(1e-12));
    CHECK(corr::w2a_series(x, traj, f.fam, kAlpha2, eta, false) ==
          doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("rho_eta: decay, positivity, and probe-sign symmetry") {
    auto& f = fixture();
    double prev = 1e300;
    for (double x : {64.0, 256.0, 1024.0, 4096.0}) {
        const double r = corr::rho_eta(x, f.ctraj, f.fam, kAlpha2, 0.5);
        CHECK(r > 0.0);
        CHECK(r < prev);
        prev = r;
    }
    // the construction pairs +eta with -eta; swapping the probe signs maps
    // (Z, Zbar) onto themselves, so rho is computed from the same series
    const double a =
        2.0 * corr::w2a_series(300.0, f.ctraj, f.fam, kAlpha2, 0.5, false) +
        2.0 * corr::w2a_series(300.0, f.ctraj, f.fam, kAlpha2, 0.5, true);
    CHECK(corr::rho_eta(300.0, f.ctraj, f.fam, kAlpha2, 0.5) ==
          doctest::Approx(a).epsilon(1e-15));
    CHECK_THROWS_AS(corr::w2a_series(0.5, f.ctraj, f.fam, kAlpha2, 0.5, false),
                    std::domain_error);
}

TEST_CASE("leading term of the two-series rewrite dominates for x >= L^3") {
    // sampled at half-powers of L, where the adjacent-scale Gaussian tail
    // of the proxy family is negligible and the exact-family picture holds
    auto& f = fixture();
    const double eta = 0.5;
    for (double x : {16384.0, 262144.0}) {  // L^3.5, L^4.5
        const int n0 = int(std::floor(std::log(x) / std::log(16.0)));
        const auto& zn = f.ctraj.states[std::size_t(n0)].z;
        const double zn2 = std::exp(2.0 * zn.log_abs -
                                    4.0 * double(n0) * std::log(16.0));
        const double lead =
            0.5 * zn2 *
            std::exp(eta * eta * kAlpha2 * f.fam.scale_sum_excess(n0, x));
        const double full =
            corr::w2a_series(x, f.ctraj, f.fam, kAlpha2, eta, false);
        CHECK(full / lead > 0.8);
        CHECK(full / lead < 1.2);
    }
}

TEST_CASE("asymptotic formula: f value, z -> 0 power law, crossover growth") {
    auto& f = fixture();
    corr::AsymptoticConstants consts;
    consts.additive_const = f.fam.c_tilde_e();
    consts.gamma0 = f.fam.gamma0();
    consts.L = 16.0;
    // with the exact Gamma_0(0), L^2 e^{-4 pi Gamma_0(0)} = 1
    const double fval = corr::log_correction_f(consts, 1e-3);
    CHECK(fval == doctest::Approx(4.0 * kPi *
                                  std::exp(4.0 * kPi * consts.additive_const) *
                                  1e-3)
                      .epsilon(1e-12));
    // eta = 1/2, z -> 0: pure power law with prefactor e^{2 pi c}/2
    const auto v = corr::asymptotic_formula(100.0, 0.0, 0.5, consts);
    CHECK(v.rho == doctest::Approx(0.5 *
                                   std::exp(2.0 * kPi * consts.additive_const) /
                                   100.0)
                       .epsilon(1e-12));
    // eta above 1/2: the free branch decays faster than the interacting
    // one, and the crossover radius where branch_b overtakes grows as z
    // shrinks (x* ~ z^{-1/(2(2 eta - 1))})
    consts.c_eta = 1.0;  // crossover location only needs the ratio shape
    const auto crossover = [&](double z) {
        double x = 2.0;
        while (x < 1e300) {
            const auto av = corr::asymptotic_formula(x, z, 0.7, consts);
            if (av.branch_b > av.branch_a) return x;
            x *= 1.05;
        }
        return x;
    };
    const double x1 = crossover(1e-3);
    const double x2 = crossover(2.5e-4);
    CHECK(x2 > 4.0 * x1);
    CHECK(x1 > 100.0);
}

TEST_CASE("exponent fits recover generated data and reject bad input") {
    corr::AsymptoticConstants consts;
    consts.additive_const = 0.06;
    consts.gamma0 = std::log(16.0) / (2.0 * kPi);
    consts.L = 16.0;
    const double z = 1e-3;
    const double fv = corr::log_correction_f(consts, z);
    corr::CorrelationProfile prof;
    prof.eta = 0.5;
    prof.z = z;
    prof.L = 16;
    prof.source = "asymptotic";
    for (double x = 64.0; x < 3e6; x *= 2.3)
        prof.points.push_back(
            {x, corr::asymptotic_formula(x, z, 0.5, consts).rho, "total"});
    const auto fit = corr::fit_exponents(prof, corr::FitModel::power_log, fv);
    CHECK(fit.power == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.logexp == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(fit.residual < 1e-10);
    corr::CorrelationProfile tiny;
    tiny.points = {{1.0, 1.0, "total"}, {2.0, 0.5, "total"}};
    CHECK_THROWS_AS(corr::fit_exponents(tiny, corr::FitModel::pure_power),
                    std::invalid_argument);
}

TEST_CASE("z = 0 profile fits the free exponent 4 eta^2") {
    auto& f = fixture();
    for (double eta : {0.3, 0.5}) {
        const auto traj = free_flow(f.fam, eta, 40);
        corr::CorrelationProfile prof;
        prof.eta = eta;
        prof.z = 0.0;
        prof.L = 16;
        prof.source = "series";
        for (double x = 50.0; x <= 4000.0; x *= 1.5)
            prof.points.push_back(
                {x, corr::rho_eta(x, traj, f.fam, kAlpha2, eta), "total"});
        const auto fit =
            corr::fit_exponents(prof, corr::FitModel::pure_power);
        CHECK(std::abs(fit.power / (4.0 * eta * eta) - 1.0) < 0.02);
    }
}

TEST_CASE("scale sums inside w2a match the family excess") {
    auto& f = fixture();
    const double x = 777.0;
    double s = 0.0;
    for (int n = 0; n <= 60; ++n)
        s += f.fam.continuum_radial(n, x) - f.fam.gamma0();
    CHECK(s == doctest::Approx(f.fam.scale_sum_excess(0, x)).epsilon(1e-10));
}
