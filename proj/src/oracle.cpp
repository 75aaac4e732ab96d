#include "bktflow/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "bktflow/fft.hpp"
#include "bktflow/rng.hpp"
#include "bktflow/special.hpp"

#include "json.hpp"

namespace bkt::oracle {

using special::kPi;

// --- Gaussian field -------------------------------------------------------

GaussianField::GaussianField(std::int64_t side,
                             const std::vector<double>& covariance_row,
                             std::uint64_t seed)
    : side_(side), seed_(seed), cov_(covariance_row) {
    const std::size_t n = size();
    if (covariance_row.size() != n)
        throw std::invalid_argument("GaussianField: covariance size");
    std::vector<fft::cd> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = fft::cd(cov_[i], 0.0);
    fft::transform_2d(grid, std::size_t(side_), -1);
    // spectrum must be (numerically) non-negative
    sqrt_lambda_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double lam = grid[i].real();
        if (lam < -1e-9)
            throw std::domain_error(
                "GaussianField: covariance spectrum has a negative mode");
        if (lam < 0.0) lam = 0.0;
        sqrt_lambda_[i] = std::sqrt(lam);
        grid[i] = fft::cd(sqrt_lambda_[i], 0.0);
    }
    fft::transform_2d(grid, std::size_t(side_), +1);
    mix_.resize(n);
    const double inv = 1.0 / double(n);
    for (std::size_t i = 0; i < n; ++i) mix_[i] = grid[i].real() * inv;
}

double GaussianField::covariance(std::int64_t dx0, std::int64_t dx1) const {
    std::int64_t a = dx0 % side_;
    if (a < 0) a += side_;
    std::int64_t b = dx1 % side_;
    if (b < 0) b += side_;
    return cov_[std::size_t(b) * std::size_t(side_) + std::size_t(a)];
}

void GaussianField::sample(std::uint64_t index, std::vector<double>& out) const {
    const std::size_t n = size();
    std::vector<double> g(n);
    rng::fill_normals(seed_, index, 0, g.data(), n);
    out.assign(n, 0.0);
    // phi = mix (*) g, cyclic convolution; direct for small boxes
    const std::int64_t s = side_;
    if (s <= 32) {
        for (std::int64_t x1 = 0; x1 < s; ++x1)
            for (std::int64_t x0 = 0; x0 < s; ++x0) {
                double acc = 0.0;
                for (std::int64_t y1 = 0; y1 < s; ++y1) {
                    std::int64_t d1 = (x1 - y1) % s;
                    if (d1 < 0) d1 += s;
                    const double* row = &mix_[std::size_t(d1) * std::size_t(s)];
                    const double* gr = &g[std::size_t(y1) * std::size_t(s)];
                    for (std::int64_t y0 = 0; y0 < s; ++y0) {
                        std::int64_t d0 = (x0 - y0) % s;
                        if (d0 < 0) d0 += s;
                        acc += row[std::size_t(d0)] * gr[std::size_t(y0)];
                    }
                }
                out[std::size_t(x1) * std::size_t(s) + std::size_t(x0)] = acc;
            }
        return;
    }
    // spectral synthesis for larger boxes: one forward and one inverse
    // transform against the cached spectrum square root
    std::vector<fft::cd> ga(n);
    for (std::size_t i = 0; i < n; ++i) ga[i] = fft::cd(g[i], 0.0);
    fft::transform_2d(ga, std::size_t(s), -1);
    for (std::size_t i = 0; i < n; ++i) ga[i] *= sqrt_lambda_[i];
    fft::transform_2d(ga, std::size_t(s), +1);
    const double inv = 1.0 / double(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = ga[i].real() * inv;
}

// --- enumeration ----------------------------------------------------------

namespace {

struct Site {
    std::int64_t x0, x1;
};

double pair_energy(const green::PotentialTable& table, const Site& a,
                   const Site& b) {
    return table.at(a.x0 - b.x0, a.x1 - b.x1);
}

// recursive loop over an n-tuple of positions
template <class F>
void for_tuples(std::int64_t side, int n, std::vector<Site>& buf, F&& fn) {
    if (n == 0) {
        fn(buf);
        return;
    }
    for (std::int64_t x1 = 0; x1 < side; ++x1)
        for (std::int64_t x0 = 0; x0 < side; ++x0) {
            buf.push_back({x0, x1});
            for_tuples(side, n - 1, buf, fn);
            buf.pop_back();
        }
}

}  // namespace

EnumerationResult enumerate_Z(const green::LatticeSpec& spec, double beta,
                              double z, int n_max,
                              const green::PotentialTable& table,
                              const std::optional<ProbePair>& probes,
                              double series_control) {
    if (n_max < 0 || n_max > 6)
        throw std::invalid_argument("enumerate_Z: n_max must be in [0, 6]");
    double cost = 1.0;
    for (int k = 0; k < n_max; ++k) cost *= double(spec.volume());
    if (cost > 2.5e9)
        throw std::runtime_error("enumerate_Z: state space too large");
    EnumerationResult res;
    res.n_max = n_max;
    double probe_self = 0.0;
    std::vector<Site> psite;
    std::vector<double> pcharge;
    if (probes) {
        psite.push_back({probes->x[0], probes->x[1]});
        psite.push_back({probes->y[0], probes->y[1]});
        pcharge = {probes->eta, -probes->eta};
        probe_self = pcharge[0] * pcharge[1] *
                     pair_energy(table, psite[0], psite[1]);
    }
    // n = 0: the no-particle configuration
    res.order_terms.push_back(std::exp(-beta * probe_self));
    for (int n = 2; n <= n_max; n += 2) {
        const int half = n / 2;
        double fact = 1.0;
        for (int k = 2; k <= half; ++k) fact *= double(k);
        const double weight = std::pow(z, double(n)) / (fact * fact);
        double sum = 0.0;
        std::vector<Site> tuple;
        tuple.reserve(std::size_t(n));
        for_tuples(spec.side, n, tuple, [&](const std::vector<Site>& xs) {
            // first half carries +1, second half -1
            double h = probe_self;
            for (int i = 0; i < n; ++i) {
                const double qi = i < half ? 1.0 : -1.0;
                for (int k = i + 1; k < n; ++k) {
                    const double qk = k < half ? 1.0 : -1.0;
                    h += qi * qk * pair_energy(table, xs[std::size_t(i)],
                                               xs[std::size_t(k)]);
                }
                for (std::size_t p = 0; p < psite.size(); ++p)
                    h += qi * pcharge[p] *
                         pair_energy(table, xs[std::size_t(i)], psite[p]);
            }
            sum += std::exp(-beta * h);
        });
        res.order_terms.push_back(weight * sum);
    }
    res.z_value = 0.0;
    for (double t : res.order_terms) res.z_value += t;
    if (res.order_terms.size() >= 2) {
        const double last = res.order_terms.back();
        res.series_ok = last < series_control * res.z_value;
    }
    return res;
}

// --- sine-Gordon MC -------------------------------------------------------

McEstimate sine_gordon_mc(const green::LatticeSpec& spec, double beta,
                          double m, double z, std::uint64_t samples,
                          std::uint64_t seed,
                          const std::optional<ProbePair>& insertion) {
    if (!(m > 0.0)) throw std::domain_error("sine_gordon_mc: m > 0");
    if (samples < 1) throw std::domain_error("sine_gordon_mc: samples >= 1");
    const green::PotentialTable w = green::yukawa_potential(spec, m);
    const std::size_t n = std::size_t(spec.volume());
    std::vector<double> cov(n);
    for (std::size_t i = 0; i < n; ++i) cov[i] = beta * w.values[i];
    GaussianField field(spec.side, cov, seed);
    std::vector<double> phi;
    std::size_t ia = 0, ib = 0;
    double eta = 0.0;
    if (insertion) {
        const auto idx = [&](std::int64_t a, std::int64_t b) {
            std::int64_t p = a % spec.side;
            if (p < 0) p += spec.side;
            std::int64_t q = b % spec.side;
            if (q < 0) q += spec.side;
            return std::size_t(q) * std::size_t(spec.side) + std::size_t(p);
        };
        ia = idx(insertion->x[0], insertion->x[1]);
        ib = idx(insertion->y[0], insertion->y[1]);
        eta = insertion->eta;
    }
    double sum_re = 0.0, sum_re2 = 0.0, sum_im = 0.0, sum_im2 = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        field.sample(i, phi);
        double s = 0.0;
        for (double v : phi) s += std::cos(v);
        const double wgt = std::exp(2.0 * z * s);
        double re = wgt, im = 0.0;
        if (insertion) {
            const double arg = eta * (phi[ia] - phi[ib]);
            re = wgt * std::cos(arg);
            im = wgt * std::sin(arg);
        }
        sum_re += re;
        sum_re2 += re * re;
        sum_im += im;
        sum_im2 += im * im;
    }
    const double ns = double(samples);
    McEstimate est;
    est.mean = sum_re / ns;
    est.imag_mean = sum_im / ns;
    const double var_re =
        std::max(0.0, sum_re2 / ns - est.mean * est.mean);
    const double var_im =
        std::max(0.0, sum_im2 / ns - est.imag_mean * est.imag_mean);
    est.stderr_ = std::sqrt(var_re / ns);
    est.imag_stderr = std::sqrt(var_im / ns);
    est.samples = samples;
    est.seed = seed;
    return est;
}

WickSeries wick_series(const green::LatticeSpec& spec, double beta, double m,
                       double z, int n_max,
                       const std::optional<ProbePair>& insertion) {
    if (n_max < 0 || n_max > 4)
        throw std::invalid_argument("wick_series: n_max in [0, 4]");
    const green::PotentialTable w = green::yukawa_potential(spec, m);
    const auto cov = [&](std::int64_t a0, std::int64_t a1, std::int64_t b0,
                         std::int64_t b1) {
        return beta * w.at(a0 - b0, a1 - b1);
    };
    std::vector<Site> ins;
    std::vector<double> insq;
    if (insertion) {
        ins.push_back({insertion->x[0], insertion->x[1]});
        ins.push_back({insertion->y[0], insertion->y[1]});
        insq = {insertion->eta, -insertion->eta};
    }
    WickSeries out;
    for (int n = 0; n <= n_max; ++n) {
        // E[(sum_x cos phi_x)^n e^{i eta(phi_a - phi_b)}]
        double total = 0.0;
        std::vector<Site> tuple;
        tuple.reserve(std::size_t(n));
        const double norm = std::pow(0.5, double(n));
        for_tuples(spec.side, n, tuple, [&](const std::vector<Site>& xs) {
            for (int sig = 0; sig < (1 << n); ++sig) {
                // variance of sum sigma_k phi_{x_k} + eta(phi_a - phi_b)
                double var = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double qi = (sig >> i) & 1 ? 1.0 : -1.0;
                    var += cov(xs[std::size_t(i)].x0, xs[std::size_t(i)].x1,
                               xs[std::size_t(i)].x0, xs[std::size_t(i)].x1);
                    for (int k = i + 1; k < n; ++k) {
                        const double qk = (sig >> k) & 1 ? 1.0 : -1.0;
                        var += 2.0 * qi * qk *
                               cov(xs[std::size_t(i)].x0,
                                   xs[std::size_t(i)].x1,
                                   xs[std::size_t(k)].x0,
                                   xs[std::size_t(k)].x1);
                    }
                    for (std::size_t p = 0; p < ins.size(); ++p)
                        var += 2.0 * qi * insq[p] *
                               cov(xs[std::size_t(i)].x0,
                                   xs[std::size_t(i)].x1, ins[p].x0,
                                   ins[p].x1);
                }
                for (std::size_t p = 0; p < ins.size(); ++p)
                    for (std::size_t q = 0; q < ins.size(); ++q)
                        var += insq[p] * insq[q] *
                               cov(ins[p].x0, ins[p].x1, ins[q].x0,
                                   ins[q].x1);
                total += std::exp(-0.5 * var);
            }
        });
        double fact = 1.0;
        for (int k = 2; k <= n; ++k) fact *= double(k);
        out.order_terms.push_back(std::pow(2.0 * z, double(n)) / fact *
                                  norm * total);
    }
    out.value = 0.0;
    for (double t : out.order_terms) out.value += t;
    return out;
}

McEstimate sine_gordon_mc_series(const green::LatticeSpec& spec, double beta,
                                 double m, double z, int n_max,
                                 std::uint64_t samples, std::uint64_t seed,
                                 const std::optional<ProbePair>& insertion) {
    if (!(m > 0.0)) throw std::domain_error("sine_gordon_mc_series: m > 0");
    const green::PotentialTable w = green::yukawa_potential(spec, m);
    const std::size_t n = std::size_t(spec.volume());
    std::vector<double> cov(n);
    for (std::size_t i = 0; i < n; ++i) cov[i] = beta * w.values[i];
    GaussianField field(spec.side, cov, seed);
    std::size_t ia = 0, ib = 0;
    double eta = 0.0;
    if (insertion) {
        const auto idx = [&](std::int64_t a, std::int64_t b) {
            std::int64_t p = a % spec.side;
            if (p < 0) p += spec.side;
            std::int64_t q = b % spec.side;
            if (q < 0) q += spec.side;
            return std::size_t(q) * std::size_t(spec.side) + std::size_t(p);
        };
        ia = idx(insertion->x[0], insertion->x[1]);
        ib = idx(insertion->y[0], insertion->y[1]);
        eta = insertion->eta;
    }
    std::vector<double> coeff(std::size_t(n_max) + 1);
    double fact = 1.0;
    for (int k = 0; k <= n_max; ++k) {
        if (k > 0) fact *= double(k);
        coeff[std::size_t(k)] = std::pow(2.0 * z, double(k)) / fact;
    }
    std::vector<double> phi;
    double sum_re = 0.0, sum_re2 = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        field.sample(i, phi);
        double s = 0.0;
        for (double v : phi) s += std::cos(v);
        double poly = 0.0, spow = 1.0;
        for (int k = 0; k <= n_max; ++k) {
            poly += coeff[std::size_t(k)] * spow;
            spow *= s;
        }
        if (insertion) poly *= std::cos(eta * (phi[ia] - phi[ib]));
        sum_re += poly;
        sum_re2 += poly * poly;
    }
    const double ns = double(samples);
    McEstimate est;
    est.mean = sum_re / ns;
    est.stderr_ = std::sqrt(
        std::max(0.0, sum_re2 / ns - est.mean * est.mean) / ns);
    est.samples = samples;
    est.seed = seed;
    return est;
}

SineGordonIdentityReport verify_sine_gordon_identity(
    const green::LatticeSpec& spec, double beta,
    const std::vector<double>& masses, const std::vector<double>& charges,
    const std::vector<std::array<std::int64_t, 2>>& positions) {
    if (charges.size() != positions.size())
        throw std::invalid_argument("verify_sine_gordon_identity: sizes");
    SineGordonIdentityReport rep;
    rep.masses = masses;
    double qtot = 0.0;
    for (double q : charges) qtot += q;
    rep.neutral = std::abs(qtot) < 1e-12;
    for (double m : masses) {
        const green::PotentialTable w = green::yukawa_potential(spec, m);
        double quad = 0.0;
        for (std::size_t i = 0; i < charges.size(); ++i)
            for (std::size_t k = 0; k < charges.size(); ++k)
                quad += charges[i] * charges[k] *
                        w.at(positions[i][0] - positions[k][0],
                             positions[i][1] - positions[k][1]);
        rep.closed_form.push_back(std::exp(-0.5 * beta * quad));
    }
    if (rep.neutral) {
        const green::PotentialTable w0 = green::coulomb_potential(spec);
        double quad = 0.0;
        for (std::size_t i = 0; i < charges.size(); ++i)
            for (std::size_t k = 0; k < charges.size(); ++k)
                quad += charges[i] * charges[k] *
                        w0.at(positions[i][0] - positions[k][0],
                              positions[i][1] - positions[k][1]);
        rep.neutral_limit = std::exp(-0.5 * beta * quad);
    } else {
        rep.trend_ok = true;
        for (std::size_t k = 1; k < rep.closed_form.size(); ++k)
            if (std::abs(rep.closed_form[k]) >=
                std::abs(rep.closed_form[k - 1]))
                rep.trend_ok = false;  // masses must be listed decreasing
    }
    return rep;
}

// --- Gaussian identities ----------------------------------------------

namespace {

struct Blocks {
    double mean = 0.0;
    double stderr_ = 0.0;
};

Blocks block_stats(const std::vector<double>& block_means) {
    Blocks b;
    const double n = double(block_means.size());
    for (double v : block_means) b.mean += v;
    b.mean /= n;
    double var = 0.0;
    for (double v : block_means) var += (v - b.mean) * (v - b.mean);
    b.stderr_ = std::sqrt(var / (n - 1.0) / n);
    return b;
}

}  // namespace

GaussianIdentityReport verify_gaussian_identities(
    const cov::CovarianceFamily& fam, int j, double alpha,
    std::uint64_t samples, std::uint64_t seed, std::int64_t box_side,
    double n_sigma) {
    GaussianIdentityReport rep;
    if (box_side <= 0) {
        box_side = std::int64_t(2.5 * fam.radius(j)) + 8;
        std::int64_t p2 = 8;
        while (p2 < box_side) p2 *= 2;
        box_side = p2;
    }
    if (double(box_side) < 2.2 * fam.radius(j))
        throw std::invalid_argument(
            "verify_gaussian_identities: box smaller than the kernel range");
    const std::size_t n = std::size_t(box_side * box_side);
    std::vector<double> cov_row(n);
    for (std::int64_t x1 = 0; x1 < box_side; ++x1)
        for (std::int64_t x0 = 0; x0 < box_side; ++x0) {
            const std::int64_t c0 = x0 <= box_side / 2 ? x0 : x0 - box_side;
            const std::int64_t c1 = x1 <= box_side / 2 ? x1 : x1 - box_side;
            cov_row[std::size_t(x1) * std::size_t(box_side) +
                    std::size_t(x0)] = fam.kernel(j, c0, c1);
        }
    GaussianField field(box_side, cov_row, seed);
    const auto idx = [&](std::int64_t a, std::int64_t b) {
        std::int64_t p = a % box_side;
        if (p < 0) p += box_side;
        std::int64_t q = b % box_side;
        if (q < 0) q += box_side;
        return std::size_t(q) * std::size_t(box_side) + std::size_t(p);
    };
    // reference points: x = 0, y = (1, 0) (within the kernel core)
    const std::int64_t y0 = 1, y1 = 0;
    const auto gam = [&](std::int64_t a, std::int64_t b) {
        return fam.kernel(j, a, b);
    };
    const auto cv = [&](std::int64_t a, std::int64_t b) {
        return field.covariance(a, b);
    };
    const auto push_exact = [&](const std::string& name, double lhs,
                                double rhs) {
        IdentityCheck c;
        c.name = name;
        c.lhs = lhs;
        c.rhs = rhs;
        c.exact = true;
        c.pass = std::abs(lhs - rhs) <= 1e-14 * (1.0 + std::abs(rhs));
        rep.checks.push_back(c);
    };
    // 1,2: polynomial identities from covariance algebra; the sampler's
    // realized covariance against the family kernel
    const double dd_cov = cv(y0 - 1, y1 + 1) - cv(y0, y1 + 1) -
                          cv(y0 - 1, y1) + cv(y0, y1);
    const double dd_gam = gam(y0 - 1, y1 + 1) - gam(y0, y1 + 1) -
                          gam(y0 - 1, y1) + gam(y0, y1);
    push_exact("grad-grad (mu=e0, nu=e1)", dd_cov, dd_gam);
    push_exact("grad^2-grad^2 (mu=e0, nu=e1)", 2.0 * dd_cov * dd_cov,
               2.0 * dd_gam * dd_gam);
    // 3..7: exponential identities by MC with block error bars
    const std::size_t i00 = idx(0, 0);
    const std::size_t ie0 = idx(1, 0);
    const std::size_t iy = idx(y0, y1);
    const std::size_t iyp0 = idx(y0 + 1, y1);
    const std::uint64_t block = std::max<std::uint64_t>(samples / 64, 1);
    const std::uint64_t nblocks = std::max<std::uint64_t>(samples / block, 2);
    enum {
        kExpXGrad2Y,   // Re E^T[e^{ia z_x}; (d z_{x+y})^2]
        kExpYGrad2X,   // Re E^T[e^{ia z_{x+y}}; (d z_x)^2]
        kExpXGradY,    // Im E^T[e^{ia z_x}; d z_{x+y}]
        kExpYGradX,    // Im E^T[e^{ia z_{x+y}}; d z_x]
        kExpExpRe,     // Re E^T[e^{ia z_x}; e^{-ia z_{x+y}}]
        kExpExpIm,
        kCount
    };
    std::array<std::vector<double>, kCount> bm;
    std::vector<double> phi;
    for (std::uint64_t b = 0; b < nblocks; ++b) {
        double s[kCount] = {0};
        double sca = 0, ssa = 0, scy = 0, ssy = 0;
        double sdy = 0, sdy2 = 0, sd0 = 0, sd02 = 0;
        for (std::uint64_t i = 0; i < block; ++i) {
            field.sample(b * block + i, phi);
            const double dy = phi[iyp0] - phi[iy];  // d^{e0} zeta_{x+y}
            const double d0 = phi[ie0] - phi[i00];  // d^{e0} zeta_x
            const double ca = std::cos(alpha * phi[i00]);
            const double sa = std::sin(alpha * phi[i00]);
            const double cy = std::cos(alpha * phi[iy]);
            const double sy = std::sin(alpha * phi[iy]);
            s[kExpXGrad2Y] += ca * dy * dy;
            s[kExpYGrad2X] += cy * d0 * d0;
            s[kExpXGradY] += sa * dy;
            s[kExpYGradX] += sy * d0;
            s[kExpExpRe] += ca * cy + sa * sy;
            s[kExpExpIm] += sa * cy - ca * sy;
            sca += ca;
            ssa += sa;
            scy += cy;
            ssy += sy;
            sdy += dy;
            sdy2 += dy * dy;
            sd0 += d0;
            sd02 += d0 * d0;
        }
        const double nb = double(block);
        bm[kExpXGrad2Y].push_back(s[kExpXGrad2Y] / nb -
                                  (sca / nb) * (sdy2 / nb));
        bm[kExpYGrad2X].push_back(s[kExpYGrad2X] / nb -
                                  (scy / nb) * (sd02 / nb));
        bm[kExpXGradY].push_back(s[kExpXGradY] / nb - (ssa / nb) * (sdy / nb));
        bm[kExpYGradX].push_back(s[kExpYGradX] / nb - (ssy / nb) * (sd0 / nb));
        bm[kExpExpRe].push_back(
            s[kExpExpRe] / nb -
            ((sca / nb) * (scy / nb) + (ssa / nb) * (ssy / nb)));
        bm[kExpExpIm].push_back(
            s[kExpExpIm] / nb -
            ((ssa / nb) * (scy / nb) - (sca / nb) * (ssy / nb)));
    }
    const double gy = gam(y0, y1);
    const double dg_fwd = gam(y0 + 1, y1) - gam(y0, y1);  // (d^{e0}Gamma)(y)
    const double dg_bwd = gam(y0, y1) - gam(y0 - 1, y1);  // (d^{-e0}Gamma)(y)
    const double pref = std::exp(-0.5 * alpha * alpha * fam.gamma0());
    const auto push_mc = [&](const std::string& name, int which, double rhs) {
        IdentityCheck c;
        c.name = name;
        const Blocks b = block_stats(bm[std::size_t(which)]);
        c.lhs = b.mean;
        c.stderr_ = b.stderr_;
        c.rhs = rhs;
        c.pass = std::abs(c.lhs - c.rhs) <= n_sigma * std::max(b.stderr_, 1e-300);
        rep.checks.push_back(c);
    };
    push_mc("exp(x)-grad^2(x+y)", kExpXGrad2Y,
            -alpha * alpha * pref * dg_fwd * dg_fwd);
    push_mc("exp(x+y)-grad^2(x)", kExpYGrad2X,
            -alpha * alpha * pref * dg_bwd * dg_bwd);
    push_mc("exp(x)-grad(x+y) [imag]", kExpXGradY, alpha * pref * dg_fwd);
    push_mc("exp(x+y)-grad(x) [imag]", kExpYGradX, -alpha * pref * dg_bwd);
    push_mc("exp-exp (eps eps' = -1)", kExpExpRe,
            pref * pref * std::expm1(alpha * alpha * gy));
    push_mc("exp-exp imaginary part", kExpExpIm, 0.0);
    for (const auto& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

MultiscaleReport verify_multiscale_sampling(const cov::CovarianceFamily& fam,
                                            int j_top, std::uint64_t samples,
                                            std::uint64_t seed,
                                            std::int64_t box_side,
                                            double n_sigma) {
    MultiscaleReport rep;
    const std::size_t n = std::size_t(box_side * box_side);
    std::vector<GaussianField> fields;
    fields.reserve(std::size_t(j_top) + 1);
    // MC part keeps only the scales whose kernels fit in the box
    // (wrapped-tail aliasing would poison the spectrum otherwise); the
    // deterministic scale-sum check below still runs through j_top
    int j_mc = -1;
    for (int j = 0; j <= j_top; ++j) {
        if (2.2 * fam.radius(j) > double(box_side)) break;
        j_mc = j;
        std::vector<double> row(n);
        for (std::int64_t x1 = 0; x1 < box_side; ++x1)
            for (std::int64_t x0 = 0; x0 < box_side; ++x0) {
                const std::int64_t c0 =
                    x0 <= box_side / 2 ? x0 : x0 - box_side;
                const std::int64_t c1 =
                    x1 <= box_side / 2 ? x1 : x1 - box_side;
                row[std::size_t(x1) * std::size_t(box_side) +
                    std::size_t(x0)] = fam.kernel(j, c0, c1);
            }
        fields.emplace_back(box_side, row, seed + std::uint64_t(j) + 1);
    }
    if (fields.empty())
        throw std::invalid_argument(
            "verify_multiscale_sampling: box smaller than the scale-0 range");
    // displacements checked: (0,0), (1,0), (2,1)
    const std::array<std::array<std::int64_t, 2>, 3> disp{
        {{0, 0}, {1, 0}, {2, 1}}};
    const std::uint64_t block = std::max<std::uint64_t>(samples / 32, 1);
    const std::uint64_t nblocks = samples / block;
    std::array<std::vector<double>, 3> bms;
    std::vector<double> phi, acc;
    for (std::uint64_t b = 0; b < nblocks; ++b) {
        std::array<double, 3> s{0, 0, 0};
        for (std::uint64_t i = 0; i < block; ++i) {
            acc.assign(n, 0.0);
            for (auto& f : fields) {
                f.sample(b * block + i, phi);
                for (std::size_t k = 0; k < n; ++k) acc[k] += phi[k];
            }
            for (std::size_t d = 0; d < disp.size(); ++d) {
                const std::size_t q =
                    std::size_t(disp[d][1]) * std::size_t(box_side) +
                    std::size_t(disp[d][0]);
                s[d] += acc[0] * acc[q];
            }
        }
        for (std::size_t d = 0; d < disp.size(); ++d)
            bms[d].push_back(s[d] / double(block));
    }
    for (std::size_t d = 0; d < disp.size(); ++d) {
        IdentityCheck c;
        c.name = "cov(sum zeta) at (" + std::to_string(disp[d][0]) + "," +
                 std::to_string(disp[d][1]) + ")";
        const Blocks b = block_stats(bms[d]);
        c.lhs = b.mean;
        c.stderr_ = b.stderr_;
        c.rhs = 0.0;
        for (int j = 0; j <= j_mc; ++j)
            c.rhs += fam.kernel(j, disp[d][0], disp[d][1]);
        c.pass = std::abs(c.lhs - c.rhs) <= n_sigma * c.stderr_;
        rep.covariance_checks.push_back(c);
        rep.all_pass = rep.all_pass && c.pass;
    }
    // deterministic scale-sum check against -(1/2pi) ln|x| + c~_E
    const double ce = fam.c_tilde_e();
    double max_res = 0.0;
    const double r_hi = std::pow(double(fam.L()), double(j_top - 1));
    for (double r = 10.0; r <= r_hi; r *= 1.7) {
        double s = 0.0;
        for (int j = 0; j <= 400; ++j) {
            s += fam.continuum_radial(j, r) - fam.gamma0();
            if (j > j_top && std::abs(fam.continuum_radial(j, r) -
                                      fam.gamma0()) < 1e-16)
                break;
        }
        const double target = -std::log(r) / (2.0 * kPi) + ce;
        max_res = std::max(max_res, std::abs(s - target));
    }
    rep.max_scale_sum_residual = max_res;
    rep.all_pass = rep.all_pass && (max_res <= 1e-3);
    return rep;
}

std::string McEstimate::to_json(const std::string& params) const {
    nlohmann::json j;
    j["value"] = mean;
    j["stderr"] = stderr_;
    j["imag"] = imag_mean;
    j["imag_stderr"] = imag_stderr;
    j["samples"] = samples;
    j["seed"] = seed;
    j["params"] = params;
    return j.dump();
}

std::string GaussianIdentityReport::to_json() const {
    nlohmann::json j;
    j["all_pass"] = all_pass;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name},
                       {"lhs", c.lhs},
                       {"rhs", c.rhs},
                       {"stderr", c.stderr_},
                       {"exact", c.exact},
                       {"pass", c.pass}});
    j["checks"] = arr;
    return j.dump();
}

std::string MultiscaleReport::to_json() const {
    nlohmann::json j;
    j["all_pass"] = all_pass;
    j["max_scale_sum_residual"] = max_scale_sum_residual;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : covariance_checks)
        arr.push_back({{"name", c.name},
                       {"lhs", c.lhs},
                       {"rhs", c.rhs},
                       {"stderr", c.stderr_},
                       {"pass", c.pass}});
    j["checks"] = arr;
    return j.dump();
}

}  // namespace bkt::oracle
