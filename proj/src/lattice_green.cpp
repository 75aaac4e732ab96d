#include "bktflow/lattice_green.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "bktflow/fft.hpp"
#include "bktflow/special.hpp"

#include "json.hpp"

namespace bkt::green {

using special::kPi;

LatticeSpec LatticeSpec::from_blocks(int L, int R) {
    if (L < 3 || L % 2 == 0)
        throw std::invalid_argument("LatticeSpec: L must be odd and >= 3");
    if (R < 1) throw std::invalid_argument("LatticeSpec: R must be >= 1");
    std::int64_t side = 1;
    for (int r = 0; r < R; ++r) {
        side *= L;
        if (side > (std::int64_t(1) << 40))
            throw std::invalid_argument("LatticeSpec: side overflows");
    }
    return LatticeSpec{L, R, side};
}

LatticeSpec LatticeSpec::from_side(std::int64_t side) {
    if (side < 3) throw std::invalid_argument("LatticeSpec: side must be >= 3");
    return LatticeSpec{0, 0, side};
}

std::int64_t LatticeSpec::wrap(std::int64_t c) const {
    std::int64_t m = c % side;
    if (m < 0) m += side;
    if (2 * m >= side) m -= side;   // centered representative
    return m;
}

double PotentialTable::at(std::int64_t x0, std::int64_t x1) const {
    const std::int64_t s = spec.side;
    std::int64_t a = x0 % s;
    if (a < 0) a += s;
    std::int64_t b = x1 % s;
    if (b < 0) b += s;
    return values[std::size_t(b) * std::size_t(s) + std::size_t(a)];
}

bool ParticleConfig::neutral() const {
    double q = 0.0;
    for (const auto& p : particles) q += p.charge;
    return q == 0.0;
}

namespace {

PotentialTable spectral_table(const LatticeSpec& spec, double m2,
                              bool drop_zero_mode, double mass_field) {
    const std::int64_t n = spec.side;
    if (n > 4096)
        throw std::runtime_error(
            "potential table: side > 4096; use coulomb_point_infinite");
    const std::size_t nn = std::size_t(n);
    std::vector<fft::cd> grid(nn * nn);
    for (std::size_t k1 = 0; k1 < nn; ++k1) {
        const double c1 = std::cos(2.0 * kPi * double(k1) / double(n));
        for (std::size_t k0 = 0; k0 < nn; ++k0) {
            const double c0 = std::cos(2.0 * kPi * double(k0) / double(n));
            const double denom = m2 + 2.0 * (1.0 - c0) + 2.0 * (1.0 - c1);
            double f = 0.0;
            if (!(drop_zero_mode && k0 == 0 && k1 == 0)) f = 1.0 / denom;
            grid[k1 * nn + k0] = fft::cd(f, 0.0);
        }
    }
    fft::transform_2d(grid, nn, +1);
    PotentialTable table;
    table.spec = spec;
    table.mass = mass_field;
    table.values.resize(nn * nn);
    const double inv_vol = 1.0 / double(spec.volume());
    double max_imag = 0.0;
    for (std::size_t i = 0; i < nn * nn; ++i) {
        table.values[i] = grid[i].real() * inv_vol;
        max_imag = std::max(max_imag, std::abs(grid[i].imag()) * inv_vol);
    }
    table.max_imag = max_imag;
    if (drop_zero_mode) {
        // W(x|0) = g(x) - g(0); makes the origin exactly zero
        const double g0 = table.values[0];
        for (auto& v : table.values) v -= g0;
        table.values[0] = 0.0;
    }
    return table;
}

}  // namespace

PotentialTable yukawa_potential(const LatticeSpec& spec, double m) {
    if (!(m > 0.0))
        throw std::domain_error("yukawa_potential: m must be positive");
    return spectral_table(spec, m * m, false, m);
}

PotentialTable coulomb_potential(const LatticeSpec& spec) {
    return spectral_table(spec, 0.0, true, 0.0);
}

double euler_constant() {
    return -(2.0 * special::kEulerGamma + std::log(8.0)) / (4.0 * kPi);
}

double energy(const ParticleConfig& config, const PotentialTable& table) {
    std::vector<Particle> all;
    all.reserve(config.particles.size() + config.probes.size());
    for (const auto& p : config.particles) all.push_back(p);
    for (const auto& p : config.probes) all.push_back(p);
    double h = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            h += all[i].charge * all[j].charge *
                 table.at(all[i].pos[0] - all[j].pos[0],
                          all[i].pos[1] - all[j].pos[1]);
    return h;
}

CeFit fit_c_e(const PotentialTable& coulomb, std::int64_t r_min,
              std::int64_t r_max) {
    const std::int64_t side = coulomb.spec.side;
    if (r_min <= 0) r_min = std::max<std::int64_t>(2, side / 128);
    if (r_max <= 0) r_max = std::max<std::int64_t>(r_min + 1, side / 16);
    const double rmin2 = double(r_min) * double(r_min);
    const double rmax2 = double(r_max) * double(r_max);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::int64_t x1 = -r_max; x1 <= r_max; ++x1) {
        for (std::int64_t x0 = -r_max; x0 <= r_max; ++x0) {
            const double r2 = double(x0) * double(x0) + double(x1) * double(x1);
            if (r2 < rmin2 || r2 > rmax2) continue;
            sum += coulomb.at(x0, x1) + std::log(r2) / (4.0 * kPi);
            ++count;
        }
    }
    if (count == 0) throw std::runtime_error("fit_c_e: empty window");
    const double c_e = sum / double(count);
    double dev = 0.0;
    for (std::int64_t x1 = -r_max; x1 <= r_max; ++x1) {
        for (std::int64_t x0 = -r_max; x0 <= r_max; ++x0) {
            const double r2 = double(x0) * double(x0) + double(x1) * double(x1);
            if (r2 < rmin2 || r2 > rmax2) continue;
            const double c = coulomb.at(x0, x1) + std::log(r2) / (4.0 * kPi);
            dev = std::max(dev, std::abs(c - c_e));
        }
    }
    return CeFit{c_e, dev, r_min, r_max, count};
}

double coulomb_point_infinite(std::int64_t x0, std::int64_t x1,
                              double rel_tol) {
    // One momentum integral is elementary:
    //   int dk/(2pi) e^{ikx}/(c - cos k) = r^{|x|} / sqrt(c^2-1),
    //   r = c - sqrt(c^2-1), c = 2 - cos k0 >= 1,
    // which reduces W(x|0) to a single k0 integral with a removable
    // endpoint singularity at k0 = 0.
    const double fx0 = double(std::llabs(x0));
    const double fx1 = double(std::llabs(x1));
    const auto f = [&](double k0) {
        const double c = 2.0 - std::cos(k0);
        const double s = std::sqrt(c * c - 1.0);
        if (s == 0.0) return -(fx1 + fx0 * fx0 * 0.0);  // measure-zero
        const double r = c - s;
        return 0.5 * (std::cos(k0 * fx0) * std::pow(r, fx1) - 1.0) / s;
    };
    return special::integrate(f, 0.0, kPi, rel_tol, 1e-15, 44) / kPi;
}

void write_csv(const PotentialTable& table, const std::string& path,
               const std::vector<std::string>& metadata,
               std::int64_t max_radius) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    for (const auto& m : metadata) out << "# " << m << "\n";
    out << "x0,x1,W\n";
    const std::int64_t h = (table.spec.side - 1) / 2;
    const std::int64_t r = max_radius < 0 ? h : std::min(max_radius, h);
    char buf[64];
    for (std::int64_t x1 = -r; x1 <= r; ++x1) {
        for (std::int64_t x0 = -r; x0 <= r; ++x0) {
            std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g\n",
                          static_cast<long long>(x0),
                          static_cast<long long>(x1), table.at(x0, x1));
            out << buf;
        }
    }
}

std::string to_json(const PotentialTable& table, std::int64_t max_radius) {
    nlohmann::json j;
    j["spec"] = {{"L", table.spec.L},
                 {"R", table.spec.R},
                 {"side", table.spec.side}};
    j["mass"] = table.mass;
    nlohmann::json vals = nlohmann::json::array();
    const std::int64_t h = (table.spec.side - 1) / 2;
    const std::int64_t r = std::min(max_radius, h);
    for (std::int64_t x1 = -r; x1 <= r; ++x1)
        for (std::int64_t x0 = -r; x0 <= r; ++x0)
            vals.push_back({x0, x1, table.at(x0, x1)});
    j["values"] = std::move(vals);
    return j.dump();
}

}  // namespace bkt::green
