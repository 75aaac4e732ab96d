#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bktflow/lattice_green.hpp"
#include "bktflow/special.hpp"

using namespace bkt;
using special::kPi;

TEST_CASE("lattice spec validation") {
    CHECK_THROWS_AS(green::LatticeSpec::from_blocks(4, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(green::LatticeSpec::from_blocks(3, 0),
                    std::invalid_argument);
    const auto s = green::LatticeSpec::from_blocks(3, 4);
    CHECK(s.side == 81);
    CHECK(s.volume() == 81 * 81);
    CHECK(s.wrap(41) == -40);
    CHECK(s.wrap(-41) == 40);
}

TEST_CASE("yukawa W(0;1) on 3x3 equals the direct 9-term k-sum") {
    const auto spec = green::LatticeSpec::from_blocks(3, 1);
    const auto w = green::yukawa_potential(spec, 1.0);
    double ref = 0.0;
    for (int n1 = 0; n1 < 3; ++n1)
        for (int n0 = 0; n0 < 3; ++n0) {
            const double k0 = 2.0 * kPi * n0 / 3.0;
            const double k1 = 2.0 * kPi * n1 / 3.0;
            ref += 1.0 / (1.0 + 2.0 * (1.0 - std::cos(k0)) +
                          2.0 * (1.0 - std::cos(k1)));
        }
    ref /= 9.0;
    CHECK(w.at(0, 0) == doctest::Approx(ref).epsilon(1e-14));
    CHECK_THROWS_AS(green::yukawa_potential(spec, 0.0), std::domain_error);
    CHECK_THROWS_AS(green::yukawa_potential(spec, -1.0), std::domain_error);
}

TEST_CASE("yukawa zero-mode identity and symmetries") {
    const auto spec = green::LatticeSpec::from_blocks(3, 4);  // side 81
    const double m = 0.5;
    const auto w = green::yukawa_potential(spec, m);
    double total = 0.0;
    for (double v : w.values) total += v;
    CHECK(total == doctest::Approx(1.0 / (m * m)).epsilon(1e-10));
    // parity and quarter-turn symmetry, pointwise
    for (std::int64_t x1 = -5; x1 <= 5; ++x1)
        for (std::int64_t x0 = -5; x0 <= 5; ++x0) {
            CHECK(w.at(x0, x1) == doctest::Approx(w.at(-x0, -x1)).epsilon(1e-13));
            CHECK(w.at(x0, x1) == doctest::Approx(w.at(-x1, x0)).epsilon(1e-13));
        }
}

TEST_CASE("coulomb potential basics and the classical value") {
    const auto spec = green::LatticeSpec::from_side(1024);
    const auto w = green::coulomb_potential(spec);
    CHECK(w.at(0, 0) == 0.0);
    CHECK(w.at(1, 0) == doctest::Approx(-0.25).epsilon(4e-4));
    CHECK(w.at(1, 0) == doctest::Approx(w.at(0, 1)).epsilon(1e-12));
}

TEST_CASE("coulomb asymptotics reproduce c_E on a mid-size torus") {
    const auto spec = green::LatticeSpec::from_side(1024);
    const auto w = green::coulomb_potential(spec);
    const auto fit = green::fit_c_e(w);  // window [8, 64]
    CHECK(std::abs(fit.c_e - green::euler_constant()) < 2e-3);
}

TEST_CASE("euler constant closed form") {
    const double ce = green::euler_constant();
    CHECK(ce == doctest::Approx(-0.2573).epsilon(2e-4));
    CHECK(4.0 * kPi * std::abs(ce) ==
          doctest::Approx(2.0 * special::kEulerGamma + std::log(8.0))
              .epsilon(1e-15));
}

TEST_CASE("energy of configurations") {
    const auto spec = green::LatticeSpec::from_side(257);
    const auto w = green::coulomb_potential(spec);
    green::ParticleConfig empty;
    CHECK(green::energy(empty, w) == 0.0);

    green::ParticleConfig pair;
    pair.particles.push_back({{0, 0}, +1.0});
    pair.particles.push_back({{1, 0}, -1.0});
    CHECK(pair.neutral());
    CHECK(green::energy(pair, w) == doctest::Approx(-w.at(1, 0)).epsilon(1e-14));

    // translation invariance and charge conjugation
    green::ParticleConfig shifted;
    shifted.particles.push_back({{7, -3}, +1.0});
    shifted.particles.push_back({{8, -3}, -1.0});
    CHECK(green::energy(pair, w) ==
          doctest::Approx(green::energy(shifted, w)).epsilon(1e-14));
    green::ParticleConfig flipped = pair;
    for (auto& p : flipped.particles) p.charge = -p.charge;
    CHECK(green::energy(pair, w) ==
          doctest::Approx(green::energy(flipped, w)).epsilon(1e-14));

    // probes enter the same pair sum
    green::ParticleConfig probed = pair;
    probed.probes.push_back({{3, 3}, 0.5});
    probed.probes.push_back({{5, 1}, -0.5});
    const double direct =
        green::energy(pair, w) + 0.5 * (-0.5) * w.at(3 - 5, 3 - 1) +
        1.0 * 0.5 * w.at(-3, -3) + 1.0 * (-0.5) * w.at(-5, -1) +
        (-1.0) * 0.5 * w.at(1 - 3, -3) + (-1.0) * (-0.5) * w.at(1 - 5, -1);
    CHECK(green::energy(probed, w) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("infinite-volume quadrature fallback matches the FFT table") {
    const auto spec = green::LatticeSpec::from_side(512);
    const auto w = green::coulomb_potential(spec);
    for (auto [x0, x1] : {std::pair<std::int64_t, std::int64_t>{1, 0},
                          {2, 1},
                          {5, 3}}) {
        const double q = green::coulomb_point_infinite(x0, x1, 1e-9);
        CHECK(q == doctest::Approx(w.at(x0, x1)).epsilon(5e-5));
    }
}
