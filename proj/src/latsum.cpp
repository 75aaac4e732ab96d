#include "bktflow/latsum.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bktflow/simd.hpp"
#include "bktflow/special.hpp"

namespace bkt::latsum {

namespace {

using simd::HermiteTable;

HermiteTable tabulate(const RadialFn& f, double r_max, double dr) {
    HermiteTable t;
    t.x0 = 0.0;
    t.dx = dr;
    t.inv_dx = 1.0 / dr;
    const std::size_t n = std::size_t(r_max / dr) + 4;
    t.value.resize(n);
    t.deriv.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.value[i] = f(dr * double(i));
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = [&](std::ptrdiff_t k) {
            const std::ptrdiff_t q = std::clamp<std::ptrdiff_t>(
                std::ptrdiff_t(i) + k, 0, std::ptrdiff_t(n) - 1);
            return t.value[std::size_t(q)];
        };
        t.deriv[i] = (v(-2) - 8.0 * v(-1) + 8.0 * v(1) - v(2)) / (12.0 * dr);
    }
    return t;
}

// orbit size of (i,h), 0 <= h <= i, under the dihedral group
inline double multiplicity(std::int64_t i, std::int64_t h) {
    if (i == 0) return 1.0;            // origin
    if (h == 0 || h == i) return 4.0;  // axis or diagonal
    return 8.0;
}

// Kahan accumulation of per-row sums, row-major shell order
struct Accum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

double octant_radial(const HermiteTable& tab, double radius, int moment) {
    const std::int64_t imax = std::int64_t(radius);
    const double r2max = radius * radius;
    std::vector<double> rs, vals, terms;
    Accum total;
    for (std::int64_t i = 0; i <= imax; ++i) {
        const std::int64_t hmax = std::min<std::int64_t>(
            i, std::int64_t(std::sqrt(std::max(0.0, r2max - double(i * i)))));
        if (double(i * i) > r2max) break;
        const std::size_t nb = std::size_t(hmax + 1);
        rs.resize(nb);
        vals.resize(nb);
        terms.resize(nb);
        for (std::int64_t h = 0; h <= hmax; ++h)
            rs[std::size_t(h)] = std::sqrt(double(i * i + h * h));
        simd::hermite_eval(tab, rs.data(), vals.data(), nb);
        for (std::int64_t h = 0; h <= hmax; ++h) {
            const double k2 = double(i * i + h * h);
            double v = vals[std::size_t(h)] * multiplicity(i, h);
            if (moment == 1) v *= k2;
            terms[std::size_t(h)] = v;
        }
        total.add(simd::sum(terms.data(), nb));
    }
    return total.s + total.c;
}

// unit-offset differences of a kernel at y, one per direction +-e0, +-e1.
// Narrow kernels difference the tabulated values; wide kernels evaluate
// the analytic gradient at the step midpoint (their literal differences
// drown in fp noise while the derivative stays clean).
struct DiffTables {
    bool lattice = true;
    HermiteTable value;  // narrow mode
    HermiteTable d1;     // wide mode: radial derivative
    HermiteTable d2;     // wide mode (grad2 only): second derivative
};

DiffTables make_diff_tables(const Kernel& k, double r_max, double dr,
                            bool need_d2) {
    DiffTables t;
    t.lattice = k.feature <= kLatticeDiffCut;
    if (t.lattice) {
        t.value = tabulate(k.value, r_max, dr);
    } else {
        t.d1 = tabulate(k.d1, r_max, dr);
        if (need_d2) t.d2 = tabulate(k.d2, r_max, dr);
    }
    return t;
}

// forward difference along direction (da, db) at y = (y0, y1)
inline double diff_at(const DiffTables& t, double y0, double y1, int da,
                      int db) {
    if (t.lattice) {
        return t.value.eval(std::hypot(y0 + double(da), y1 + double(db))) -
               t.value.eval(std::hypot(y0, y1));
    }
    const double c0 = y0 + 0.5 * double(da);
    const double c1 = y1 + 0.5 * double(db);
    const double rc = std::hypot(c0, c1);
    if (rc < 1e-9) return 0.0;
    return t.d1.eval(rc) * (c0 * double(da) + c1 * double(db)) / rc;
}

double octant_grad(const DiffTables& ta, const DiffTables& tb,
                   double radius) {
    const std::int64_t imax = std::int64_t(radius) + 1;
    const double r2max = (radius + 1.0) * (radius + 1.0);
    Accum total;
    std::vector<double> terms;
    for (std::int64_t i = 0; i <= imax; ++i) {
        const std::int64_t hmax = std::min<std::int64_t>(
            i, std::int64_t(
                   std::sqrt(std::max(0.0, r2max - double(i * i)))));
        if (double(i * i) > r2max) break;
        const std::size_t nb = std::size_t(hmax + 1);
        terms.resize(nb);
        const double fi = double(i);
        for (std::int64_t h = 0; h <= hmax; ++h) {
            const double fh = double(h);
            const double v =
                0.5 * (diff_at(ta, fi, fh, 1, 0) * diff_at(tb, fi, fh, 1, 0) +
                       diff_at(ta, fi, fh, -1, 0) *
                           diff_at(tb, fi, fh, -1, 0) +
                       diff_at(ta, fi, fh, 0, 1) * diff_at(tb, fi, fh, 0, 1) +
                       diff_at(ta, fi, fh, 0, -1) *
                           diff_at(tb, fi, fh, 0, -1));
            terms[std::size_t(h)] = v * multiplicity(i, h);
        }
        total.add(simd::sum(terms.data(), nb));
    }
    return total.s + total.c;
}

// offsets for the 16 (mu,nu) double differences
struct Off {
    int a, b;
};
constexpr Off kOffsets[13] = {{0, 0}, {1, 0},  {-1, 0}, {0, 1},  {0, -1},
                              {2, 0}, {-2, 0}, {0, 2},  {0, -2}, {1, 1},
                              {1, -1}, {-1, 1}, {-1, -1}};

int off_index(int a, int b) {
    for (int k = 0; k < 13; ++k)
        if (kOffsets[k].a == a && kOffsets[k].b == b) return k;
    throw std::logic_error("off_index");
}

struct MuNuVec {
    int mu[2];
    int nu[2];
    int inu, inum, imu;  // offset-table indices of nu, nu-mu, -mu
};

std::vector<MuNuVec> munu_vec_table() {
    const int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    std::vector<MuNuVec> out;
    for (const auto& mu : dirs)
        for (const auto& nu : dirs)
            out.push_back({{mu[0], mu[1]},
                           {nu[0], nu[1]},
                           off_index(nu[0], nu[1]),
                           off_index(nu[0] - mu[0], nu[1] - mu[1]),
                           off_index(-mu[0], -mu[1])});
    return out;
}

// (d^{-mu} d^{nu} f)(y) up to the sign s(-mu)s(nu) shared by both factors
inline double ddiff_at(const DiffTables& t, double y0, double y1,
                       const MuNuVec& mn, const double latt_vals[13]) {
    if (t.lattice)
        return latt_vals[mn.inum] - latt_vals[mn.imu] - latt_vals[mn.inu] +
               latt_vals[0];
    // second difference as the Hessian at the cell midpoint
    const double c0 = y0 + 0.5 * double(mn.nu[0] - mn.mu[0]);
    const double c1 = y1 + 0.5 * double(mn.nu[1] - mn.mu[1]);
    const double rc = std::hypot(c0, c1);
    const double mudotnu =
        double(mn.mu[0] * mn.nu[0] + mn.mu[1] * mn.nu[1]);
    if (rc < 1e-9) return -t.d2.eval(0.0) * mudotnu;
    const double pmu = (c0 * double(mn.mu[0]) + c1 * double(mn.mu[1])) / rc;
    const double pnu = (c0 * double(mn.nu[0]) + c1 * double(mn.nu[1])) / rc;
    const double f2 = t.d2.eval(rc);
    const double f1r = t.d1.eval(rc) / rc;
    return -(f2 * pmu * pnu + f1r * (mudotnu - pmu * pnu));
}

double octant_grad2(const DiffTables& ta, const DiffTables& tb,
                    double radius) {
    static const std::vector<MuNuVec> munu = munu_vec_table();
    const std::int64_t imax = std::int64_t(radius) + 2;
    const double r2max = (radius + 2.0) * (radius + 2.0);
    std::vector<double> terms;
    Accum total;
    double la[13] = {0}, lb[13] = {0};
    for (std::int64_t i = 0; i <= imax; ++i) {
        const std::int64_t hmax = std::min<std::int64_t>(
            i, std::int64_t(
                   std::sqrt(std::max(0.0, r2max - double(i * i)))));
        if (double(i * i) > r2max) break;
        const std::size_t nb = std::size_t(hmax + 1);
        terms.resize(nb);
        for (std::int64_t h = 0; h <= hmax; ++h) {
            const double fi = double(i), fh = double(h);
            if (ta.lattice)
                for (int k = 0; k < 13; ++k)
                    la[k] = ta.value.eval(std::hypot(fi + kOffsets[k].a,
                                                     fh + kOffsets[k].b));
            if (tb.lattice)
                for (int k = 0; k < 13; ++k)
                    lb[k] = tb.value.eval(std::hypot(fi + kOffsets[k].a,
                                                     fh + kOffsets[k].b));
            double v = 0.0;
            for (const auto& mn : munu)
                v += ddiff_at(ta, fi, fh, mn, la) *
                     ddiff_at(tb, fi, fh, mn, lb);
            terms[std::size_t(h)] = 0.25 * v * multiplicity(i, h);
        }
        total.add(simd::sum(terms.data(), nb));
    }
    return total.s + total.c;
}

// exact integral of the cubic Hermite interpolant over [0, r_hi]
double spline_integral(const HermiteTable& tab, double r_hi) {
    const std::size_t n_cell =
        std::min(tab.size() - 1,
                 std::size_t(std::max(0.0, r_hi * tab.inv_dx)));
    const double dx = tab.dx;
    double s0 = 0.0, s1 = 0.0, c0 = 0.0, c1 = 0.0;
    for (std::size_t i = 0; i < n_cell; ++i) {
        const double add0 = tab.value[i] + tab.value[i + 1];
        double y = add0 - c0;
        double t = s0 + y;
        c0 = (t - s0) - y;
        s0 = t;
        const double add1 = tab.deriv[i] - tab.deriv[i + 1];
        y = add1 - c1;
        t = s1 + y;
        c1 = (t - s1) - y;
        s1 = t;
    }
    return 0.5 * dx * (s0 + c0) + dx * dx / 12.0 * (s1 + c1);
}

double continuum_radial(const RadialFn& f, double radius, double feature,
                        int moment, const Options& opt) {
    // tabulate g(r) = 2 pi r^{1+2m} F(r) and integrate the spline exactly;
    // denser sampling than the octant tables since the moment factor
    // steepens the integrand
    const double dr = feature / double(2 * opt.nodes_per_scale);
    const auto g = [&](double r) {
        const double w = moment == 1 ? r * r : 1.0;
        return 2.0 * special::kPi * r * w * f(r);
    };
    const HermiteTable tab = tabulate(g, radius + 2.0, dr);
    return spline_integral(tab, radius + 2.0);
}

// geometric radial panels keep the adaptive recursion shallow on ranges
// many decades wider than the integrand features
template <class Rad>
double panel_integral(const Rad& rad, double feature, double radius,
                      const Options& opt) {
    double total = 0.0;
    double a = 0.0;
    double w = std::max(feature, 1.0);
    while (a < radius) {
        const double b = std::min(a + w, radius);
        total += special::integrate(rad, a, b, opt.quad_rel, 1e-16, 10);
        a = b;
        w *= 2.0;
    }
    return total;
}

// Continuum gradient sums collapse to radial derivative products:
//   sum'_mu dA dB        -> A' B'
//   sum''_munu ddA ddB   -> A'' B'' + A' B' / r^2   (Frobenius of the
//                           two radial Hessians)
// valid where the route is taken (features >= L^2 sites wide).
double continuum_grad(const Kernel& a, const Kernel& b, double radius,
                      const Options& opt) {
    const auto rad = [&](double r) {
        return 2.0 * special::kPi * r * a.d1(r) * b.d1(r);
    };
    return panel_integral(rad, std::min(a.feature, b.feature), radius, opt);
}

double continuum_grad2(const Kernel& a, const Kernel& b, double radius,
                       const Options& opt) {
    const auto rad = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double v =
            a.d2(r) * b.d2(r) + a.d1(r) * b.d1(r) / (r * r);
        return 2.0 * special::kPi * r * v;
    };
    return panel_integral(rad, std::min(a.feature, b.feature), radius, opt);
}

}  // namespace

double radial_sum(const RadialFn& f, double support_radius,
                  double feature_scale, int moment, const Options& opt) {
    if (support_radius <= opt.exact_budget && !opt.force_continuum) {
        const double dr = feature_scale / double(opt.nodes_per_scale);
        const HermiteTable tab = tabulate(f, support_radius + 2.0, dr);
        return octant_radial(tab, support_radius, moment);
    }
    if (opt.force_exact)
        throw std::runtime_error("radial_sum: support exceeds exact budget");
    return continuum_radial(f, support_radius, feature_scale, moment, opt);
}

double grad_pair_sum(const Kernel& a, const Kernel& b, double support_radius,
                     const Options& opt) {
    if (support_radius <= opt.exact_budget && !opt.force_continuum) {
        const double dr = std::min(a.feature, b.feature) /
                          double(opt.nodes_per_scale);
        const DiffTables ta =
            make_diff_tables(a, support_radius + 4.0, dr, false);
        const DiffTables tb =
            make_diff_tables(b, support_radius + 4.0, dr, false);
        return octant_grad(ta, tb, support_radius);
    }
    if (opt.force_exact)
        throw std::runtime_error("grad_pair_sum: support exceeds exact budget");
    return continuum_grad(a, b, support_radius + 2.0, opt);
}

double grad2_pair_sum(const Kernel& a, const Kernel& b,
                      double support_radius, const Options& opt) {
    if (support_radius <= opt.exact_budget && !opt.force_continuum) {
        const double dr = std::min(a.feature, b.feature) /
                          double(opt.nodes_per_scale);
        const DiffTables ta =
            make_diff_tables(a, support_radius + 6.0, dr, true);
        const DiffTables tb =
            make_diff_tables(b, support_radius + 6.0, dr, true);
        return octant_grad2(ta, tb, support_radius);
    }
    if (opt.force_exact)
        throw std::runtime_error(
            "grad2_pair_sum: support exceeds exact budget");
    return continuum_grad2(a, b, support_radius + 3.0, opt);
}

}  // namespace bkt::latsum
