// lattice_green.hpp -- periodic-torus Yukawa/Coulomb potentials, the
// lattice constant c_E, and configuration energies.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bkt::green {

// Periodic square lattice, sites (x0,x1) in the centered box
// max{|x0|,|x1|} < side/2.  Constructed either from the block data
// (L odd, side = L^R) or from an explicit side for plain torus work.
struct LatticeSpec {
    int L = 0;       // 0 when constructed from an explicit side
    int R = 0;
    std::int64_t side = 0;

    static LatticeSpec from_blocks(int L, int R);
    static LatticeSpec from_side(std::int64_t side);

    std::int64_t volume() const { return side * side; }
    std::int64_t wrap(std::int64_t c) const;   // into (-side/2, side/2]
};

struct PotentialTable {
    LatticeSpec spec;
    double mass = 0.0;                // 0 = Coulomb (zero-mode removed)
    std::vector<double> values;       // row-major, index = (x1 mod side)*side + (x0 mod side)
    double max_imag = 0.0;            // diagnostic from the inverse FFT

    double at(std::int64_t x0, std::int64_t x1) const;
    double at_wrapped(std::int64_t x0, std::int64_t x1) const { return at(x0, x1); }
};

struct Particle {
    std::array<std::int64_t, 2> pos;
    double charge;                    // +-1 for particles, +-eta for probes
};

struct ParticleConfig {
    std::vector<Particle> particles;  // unit charges
    std::vector<Particle> probes;     // fractional charges, eta in (0,1)

    bool neutral() const;
};

// W_L(x;m), Eqs. of the spectral sum over the reciprocal lattice.
PotentialTable yukawa_potential(const LatticeSpec& spec, double m);

// W_L(x|0); values(0) == 0 exactly.
PotentialTable coulomb_potential(const LatticeSpec& spec);

// c_E = -(2 gamma_E + ln 8)/(4 pi)
double euler_constant();

// sum_{i<j} q_i q_j W(x_i - x_j) over particles and probes together
double energy(const ParticleConfig& config, const PotentialTable& table);

struct CeFit {
    double c_e;
    double max_abs_dev;     // max |W + ln|x|/2pi - c_e| over the window
    std::int64_t r_min;
    std::int64_t r_max;
    std::size_t points;
};

// Least-squares constant of W(x|0) + ln|x|/(2 pi) over r_min <= |x| <= r_max.
// Defaults follow the side/128..side/16 window.
CeFit fit_c_e(const PotentialTable& coulomb, std::int64_t r_min = 0,
              std::int64_t r_max = 0);

// Infinite-volume W(x|0) by k-space quadrature; the fallback path when a
// torus table would not fit in memory.
double coulomb_point_infinite(std::int64_t x0, std::int64_t x1,
                              double rel_tol = 1e-10);

void write_csv(const PotentialTable& table, const std::string& path,
               const std::vector<std::string>& metadata,
               std::int64_t max_radius = -1);
std::string to_json(const PotentialTable& table, std::int64_t max_radius);

}  // namespace bkt::green
