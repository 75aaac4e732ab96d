#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bktflow/latsum.hpp"
#include "bktflow/special.hpp"

using namespace bkt;
using special::kPi;

namespace {

// plain reference loops, no tables, no octant reduction
template <class F>
double naive_radial(const F& f, double radius, int moment) {
    const std::int64_t r = std::int64_t(radius);
    long double total = 0.0L;
    for (std::int64_t x1 = -r; x1 <= r; ++x1)
        for (std::int64_t x0 = -r; x0 <= r; ++x0) {
            const double k2 = double(x0 * x0 + x1 * x1);
            if (k2 > radius * radius) continue;
            double v = f(std::sqrt(k2));
            if (moment == 1) v *= k2;
            total += v;
        }
    return double(total);
}

template <class F, class G>
double naive_grad(const F& a, const G& b, double radius) {
    const std::int64_t r = std::int64_t(radius) + 2;
    long double total = 0.0L;
    const auto av = [&](std::int64_t p, std::int64_t q) {
        return a(std::hypot(double(p), double(q)));
    };
    const auto bv = [&](std::int64_t p, std::int64_t q) {
        return b(std::hypot(double(p), double(q)));
    };
    for (std::int64_t x1 = -r; x1 <= r; ++x1)
        for (std::int64_t x0 = -r; x0 <= r; ++x0) {
            const double fa = av(x0, x1), fb = bv(x0, x1);
            total += 0.5L *
                     ((av(x0 + 1, x1) - fa) * (bv(x0 + 1, x1) - fb) +
                      (av(x0 - 1, x1) - fa) * (bv(x0 - 1, x1) - fb) +
                      (av(x0, x1 + 1) - fa) * (bv(x0, x1 + 1) - fb) +
                      (av(x0, x1 - 1) - fa) * (bv(x0, x1 - 1) - fb));
        }
    return double(total);
}

}  // namespace

TEST_CASE("radial sum: exact octant path vs naive double loop") {
    const auto f = [](double r) { return std::exp(-r * r / 57.0); };
    latsum::Options opt;
    for (int moment : {0, 1}) {
        const double got = latsum::radial_sum(f, 60.0, 7.5, moment, opt);
        const double ref = naive_radial(f, 60.0, moment);
        CHECK(got == doctest::Approx(ref).epsilon(1e-11));
    }
}

TEST_CASE("radial sum: continuum route agrees with the exact route") {
    const auto f = [](double r) { return std::exp(-r * r / (2.0 * 900.0)); };
    latsum::Options exact_opt;
    latsum::Options cont_opt;
    cont_opt.force_continuum = true;
    for (int moment : {0, 1}) {
        const double ex = latsum::radial_sum(f, 400.0, 30.0, moment, exact_opt);
        const double ct = latsum::radial_sum(f, 400.0, 30.0, moment, cont_opt);
        CHECK(ct == doctest::Approx(ex).epsilon(1e-6));
    }
}

namespace {

// Gaussian bump kernel e^{-r^2 / (2 s^2)} with analytic derivatives
latsum::Kernel gauss_kernel(double s) {
    const double s2 = s * s;
    return {[s2](double r) { return std::exp(-r * r / (2.0 * s2)); },
            [s2](double r) {
                return -r / s2 * std::exp(-r * r / (2.0 * s2));
            },
            [s2](double r) {
                return (r * r / s2 - 1.0) / s2 *
                       std::exp(-r * r / (2.0 * s2));
            },
            s};
}

}  // namespace

TEST_CASE("gradient pair sum vs naive loop and continuum route") {
    const auto a = gauss_kernel(20.0);
    const auto b = gauss_kernel(31.6);
    latsum::Options opt;
    const double got = latsum::grad_pair_sum(a, b, 150.0, opt);
    const double ref = naive_grad(a.value, b.value, 150.0);
    CHECK(got == doctest::Approx(ref).epsilon(1e-7));
    // continuum route replaces unit differences by derivative products;
    // the residual is the genuine O(1/width^2) lattice correction
    latsum::Options cont;
    cont.force_continuum = true;
    const double ct = latsum::grad_pair_sum(a, b, 150.0, cont);
    CHECK(ct == doctest::Approx(ref).epsilon(2e-3));
}

TEST_CASE("wide kernels switch to midpoint-gradient differences") {
    // same kernel, once declared narrow and once declared wide; the two
    // evaluation modes agree to the O(1/width^2) difference correction
    auto narrow = gauss_kernel(300.0);
    auto wide = narrow;
    wide.feature = 400.0;  // above the lattice-difference cut
    narrow.feature = 100.0;
    latsum::Options opt;
    opt.exact_budget = 5000.0;
    const double as_narrow =
        latsum::grad_pair_sum(narrow, narrow, 1500.0, opt);
    const double as_wide = latsum::grad_pair_sum(wide, wide, 1500.0, opt);
    CHECK(as_wide == doctest::Approx(as_narrow).epsilon(5e-6));
}

TEST_CASE("double-difference pair sum telescopes against a constant") {
    // sum_y (d^{-mu} d^{nu} A)(y) * 1 = 0; B flat so its differences vanish
    const auto a = gauss_kernel(7.0);
    latsum::Kernel flat{[](double) { return 1.0; },
                        [](double) { return 0.0; },
                        [](double) { return 0.0; }, 5.0};
    latsum::Options opt;
    const double got = latsum::grad2_pair_sum(a, flat, 40.0, opt);
    CHECK(std::abs(got) < 1e-12);
}

TEST_CASE("grad2 pair sum: exact vs continuum dual route") {
    const auto a = gauss_kernel(50.0);
    const auto b = gauss_kernel(122.0);
    latsum::Options exact_opt;
    latsum::Options cont;
    cont.force_continuum = true;
    const double ex = latsum::grad2_pair_sum(a, b, 500.0, exact_opt);
    const double ct = latsum::grad2_pair_sum(a, b, 500.0, cont);
    CHECK(ct == doctest::Approx(ex).epsilon(2e-3));
}

TEST_CASE("force_exact raises when the support exceeds the budget") {
    latsum::Options opt;
    opt.force_exact = true;
    opt.exact_budget = 64.0;
    CHECK_THROWS_AS(latsum::radial_sum([](double) { return 0.0; }, 100.0,
                                       10.0, 0, opt),
                    std::runtime_error);
    CHECK_THROWS_AS(latsum::grad_pair_sum(gauss_kernel(10.0),
                                          gauss_kernel(10.0), 100.0, opt),
                    std::runtime_error);
}
