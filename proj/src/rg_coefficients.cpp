#include "bktflow/rg_coefficients.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "bktflow/special.hpp"

namespace bkt::coeff {

using special::kPi;

const Row& CoefficientTable::at(int j) const {
    if (j < 0) throw std::domain_error("CoefficientTable::at: j >= 0");
    const std::size_t q = std::min<std::size_t>(std::size_t(j),
                                                rows.size() - 1);
    return rows[q];
}

void CoefficientTable::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    out << "# L=" << L << " alpha2=" << alpha2 << " eta=" << eta
        << " cutoff_label=" << cutoff_label << " j_freeze=" << j_freeze
        << "\n";
    out << "j,a,b,m11,m22,m12,m21,E2,E3,E4\n";
    char buf[320];
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const Row& r = rows[j];
        std::snprintf(buf, sizeof buf,
                      "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                      "%.17g\n",
                      j, r.a, r.b, r.m11, r.m22, r.m12, r.m21, r.e2, r.e3,
                      r.e4);
        out << buf;
    }
}

Builder::Builder(const cov::CovarianceFamily& fam, Options opt)
    : fam_(fam), opt_(opt), g0_(fam.gamma0()) {
    if (!(opt_.eta > 0.0 && opt_.eta < 1.0))
        throw std::domain_error("Builder: eta must be in (0,1)");
    const int cap = std::min(opt_.j_max, opt_.j_freeze) + 1;
    s_cache_.assign(std::size_t(cap), std::nan(""));
    c_cache_.assign(std::size_t(cap), {});
    t_cache_.assign(std::size_t(cap), {});
}

namespace {

double lpow(int L, int e) { return std::pow(double(L), double(e)); }

}  // namespace

// --- gradient building blocks ------------------------------------------

latsum::Kernel Builder::kernel_of(int scale) const {
    latsum::Kernel k;
    k.value = [this, scale](double r) {
        return fam_.continuum_radial(scale, r);
    };
    k.d1 = [this, scale](double r) { return fam_.deriv1_radial(scale, r); };
    k.d2 = [this, scale](double r) { return fam_.deriv2_radial(scale, r); };
    k.feature = lpow(fam_.L(), scale);
    return k;
}

double Builder::support_of(int scale) const {
    return fam_.rho_max() * lpow(fam_.L(), scale) * opt_.support_scale;
}

double Builder::grad_s(int j) const {
    if (j < int(s_cache_.size()) && !std::isnan(s_cache_[std::size_t(j)]))
        return s_cache_[std::size_t(j)];
    const latsum::Kernel k = kernel_of(j);
    const double v = latsum::grad_pair_sum(k, k, support_of(j), opt_.sum);
    if (j < int(s_cache_.size())) s_cache_[std::size_t(j)] = v;
    return v;
}

double Builder::grad_c(int n, int j) const {
    if (j < int(c_cache_.size())) {
        auto& row = c_cache_[std::size_t(j)];
        if (row.empty()) row.assign(std::size_t(j) + 1, std::nan(""));
        if (!std::isnan(row[std::size_t(n)])) return row[std::size_t(n)];
    }
    const double v = latsum::grad_pair_sum(kernel_of(n), kernel_of(j),
                                           support_of(n), opt_.sum);
    if (j < int(c_cache_.size())) c_cache_[std::size_t(j)][std::size_t(n)] = v;
    return v;
}

double Builder::grad2_t(int n, int j) const {
    if (j < int(t_cache_.size())) {
        auto& row = t_cache_[std::size_t(j)];
        if (row.empty()) row.assign(std::size_t(j) + 1, std::nan(""));
        if (!std::isnan(row[std::size_t(n)])) return row[std::size_t(n)];
    }
    const double v = latsum::grad2_pair_sum(kernel_of(n), kernel_of(j),
                                            support_of(n), opt_.sum);
    if (j < int(t_cache_.size())) t_cache_[std::size_t(j)][std::size_t(n)] = v;
    return v;
}

// --- w kernels -----------------------------------------------------------

double Builder::w0b_piece(int j, int n, double r) const {
    // (1/2) e^{-a2 [G_{j-1,n+1}(0) - G_{j-1,n+1}(r)]} e^{-a2 g0}
    //       (e^{a2 Gamma_n(r)} - 1) L^{-4n}
    const double a2 = opt_.alpha2;
    const double p0 = double(j - 1 - n) * g0_;
    const double pr = fam_.partial_sum_radial(j - 1, n + 1, r);
    const double gn = fam_.continuum_radial(n, r);
    return 0.5 * std::exp(-a2 * (p0 - pr)) * std::exp(-a2 * g0_) *
           std::expm1(a2 * gn) * lpow(fam_.L(), -4 * n);
}

double Builder::w0b(int j, double r) const {
    double s = 0.0;
    for (int n = 1; n <= j - 1; ++n) s += w0b_piece(j, n, r);
    return s;
}

double Builder::w0c(int j, double r) const {
    const double a2 = opt_.alpha2;
    double s = 0.0;
    for (int n = 1; n <= j - 1; ++n) {
        const double p0 = double(j - 1 - n) * g0_;
        const double pr = fam_.partial_sum_radial(j - 1, n + 1, r);
        const double gn = fam_.continuum_radial(n, r);
        s += 0.5 * std::exp(-a2 * (p0 + pr)) * std::exp(-a2 * g0_) *
             std::expm1(-a2 * gn) * lpow(fam_.L(), -4 * n);
    }
    return s;
}

double Builder::w0a(int j, int n_lo, double y0, double y1, cov::Dir mu,
                    cov::Dir nu) const {
    // (1/2) sum_n (d^{-mu} d^{nu} Gamma_n)(y); signs of the two lattice
    // derivatives included
    const auto sgn = [](cov::Dir d) { return (d[0] + d[1]) > 0 ? 1.0 : -1.0; };
    double s = 0.0;
    for (int n = n_lo; n <= j - 1; ++n) {
        const auto g = [&](double a, double b) {
            return fam_.continuum_radial(n, std::hypot(a, b));
        };
        const double dmu0 = -double(mu[0]), dmu1 = -double(mu[1]);
        const double v = g(y0 + double(nu[0]) + dmu0, y1 + double(nu[1]) + dmu1) -
                         g(y0 + dmu0, y1 + dmu1) -
                         g(y0 + double(nu[0]), y1 + double(nu[1])) + g(y0, y1);
        s += 0.5 * (-sgn(mu)) * sgn(nu) * v;
    }
    return s;
}

double Builder::w0d(int j, double /*r*/, cov::Dir mu, double y0,
                    double y1) const {
    const double a2 = opt_.alpha2;
    const double alpha = std::sqrt(a2);
    const auto sgn = [](cov::Dir d) { return (d[0] + d[1]) > 0 ? 1.0 : -1.0; };
    double s = 0.0;
    for (int n = 1; n <= j - 1; ++n) {
        const auto g = [&](double a, double b) {
            return fam_.continuum_radial(n, std::hypot(a, b));
        };
        const double diff =
            sgn(mu) * (g(y0 + double(mu[0]), y1 + double(mu[1])) - g(y0, y1));
        s += 0.5 * alpha * std::exp(-0.5 * a2 * double(j - n) * g0_) * diff *
             lpow(fam_.L(), -2 * n);
    }
    return s;
}

double Builder::w0e(int j, double y0, double y1) const {
    const double a2 = opt_.alpha2;
    double s = 0.0;
    for (int n = 1; n <= j - 1; ++n) {
        double inner = 0.0;
        for (const auto& mu : cov::kDirs) {
            const auto dpart = [&](int lo) {
                const auto f = [&](double a, double b) {
                    return fam_.partial_sum_radial(j - 1, lo, std::hypot(a, b));
                };
                return f(y0 + double(mu[0]), y1 + double(mu[1])) - f(y0, y1);
            };
            const double d1 = dpart(n);
            const double d2 = dpart(n + 1);
            inner += 0.5 * (d1 * d1 - d2 * d2);  // implicit 1/2 on sum_mu
        }
        s += 0.25 * a2 * std::exp(-0.5 * a2 * double(j - n) * g0_) * inner *
             lpow(fam_.L(), -2 * n);
    }
    return s;
}

double Builder::w1c(double xi, int j, double r) const {
    const double a2 = opt_.alpha2;
    double s = 0.0;
    for (int n = 0; n <= j - 1; ++n) {
        const double pr = fam_.partial_sum_radial(j - 1, n + 1, r);
        const double gn = fam_.continuum_radial(n, r);
        s += lpow(fam_.L(), -2 * n) *
             std::exp(-0.5 * a2 * double(j - n) * g0_) *
             std::exp(xi * a2 * pr) * std::expm1(xi * a2 * gn);
    }
    return s;
}

// --- coefficients --------------------------------------------------------

double Builder::compute_a(int j) const {
    if (j == 0) return 0.0;
    const double a2 = opt_.alpha2;
    double total = 0.0;
    // kernel part carries weight 2 w0b (the sigma = +- doubling), matching
    // the E4 display and the telescoped continuum limit; m21 and b cross-
    // checks pin the same normalization
    for (int n = 1; n <= j - 1; ++n) {
        const double support = support_of(n);
        const auto f = [&](double r) {
            return 2.0 * w0b_piece(j, n, r) *
                   std::expm1(-a2 * fam_.deficit_radial(j, r));
        };
        total += latsum::radial_sum(f, support, lpow(fam_.L(), n), 1,
                                    opt_.sum);
    }
    {
        const double support = support_of(j);
        const auto f = [&](double r) {
            return std::expm1(a2 * fam_.continuum_radial(j, r));
        };
        total += std::exp(-a2 * g0_) * lpow(fam_.L(), -4 * j) *
                 latsum::radial_sum(f, support, lpow(fam_.L(), j), 1,
                                    opt_.sum);
    }
    return 0.5 * a2 * total;
}

double Builder::compute_b(int j) const {
    if (j == 0) return 0.0;
    const double a2 = opt_.alpha2;
    double s = grad_s(j);
    for (int n = 0; n <= j - 1; ++n) {
        const double w = std::exp(-0.5 * a2 * double(j - n) * g0_) *
                         lpow(fam_.L(), 2 * (j - n));
        s += 2.0 * w * grad_c(n, j);
    }
    return 0.5 * a2 * s;
}

double Builder::m_diag(double eta_sq, int j) const {
    const double a2 = opt_.alpha2;
    double s = grad_s(j);
    for (int n = 0; n <= j - 1; ++n) s += 2.0 * grad_c(n, j);
    return 0.5 * a2 * eta_sq * s;
}

double Builder::m_offdiag(double xi, int j) const {
    const double a2 = opt_.alpha2;
    double total = 0.0;
    for (int n = 0; n <= j - 1; ++n) {
        const double support = support_of(n);
        const auto f = [&](double r) {
            const double pr = fam_.partial_sum_radial(j - 1, n + 1, r);
            const double gn = fam_.continuum_radial(n, r);
            const double piece = lpow(fam_.L(), -2 * n) *
                                 std::exp(-0.5 * a2 * double(j - n) * g0_) *
                                 std::exp(xi * a2 * pr) *
                                 std::expm1(xi * a2 * gn);
            return piece * std::expm1(-xi * a2 * fam_.deficit_radial(j, r));
        };
        total +=
            latsum::radial_sum(f, support, lpow(fam_.L(), n), 0, opt_.sum);
    }
    {
        const double support = support_of(j);
        const auto f = [&](double r) {
            return std::expm1(xi * a2 * fam_.continuum_radial(j, r));
        };
        total += lpow(fam_.L(), -2 * j) * std::exp(-xi * a2 * g0_) *
                 latsum::radial_sum(f, support, lpow(fam_.L(), j), 0,
                                    opt_.sum);
    }
    return total;
}

double Builder::e2(int j) const {
    // -(L^{2j}/2) sum'_mu (d^{-mu} d^mu Gamma_j)(0) with the implicit 1/2;
    // the deficit form survives the L^{2j} amplification at large j
    return 2.0 * lpow(fam_.L(), 2 * j) * fam_.deficit_radial(j, 1.0);
}

double Builder::e3(int j) const {
    if (j == 0) return 0.0;
    double s = grad2_t(j, j);
    for (int n = 1; n <= j - 1; ++n) s += 2.0 * grad2_t(n, j);
    return 0.25 * lpow(fam_.L(), 2 * j) * s;
}

double Builder::e4(int j) const {
    if (j == 0) return 0.0;
    const double a2 = opt_.alpha2;
    // lap_j = sum'_mu (d^{-mu} d^mu Gamma_j)(0) = -4 deficit_j(1)
    const double lap = -4.0 * fam_.deficit_radial(j, 1.0);
    double total = 0.0;
    for (int n = 1; n <= j - 1; ++n) {
        const double support = support_of(n);
        const auto f0 = [&](double r) {
            return w0b_piece(j, n, r) *
                   std::expm1(-a2 * fam_.deficit_radial(j, r));
        };
        const auto f1 = [&](double r) { return w0b_piece(j, n, r); };
        // Taylor counterterm weight alpha^2/4: the expectation of the
        // (wj0) bracket at zero field, which cancels the |y|^2 growth and
        // keeps E4_j scale-stable
        total += 2.0 * lpow(fam_.L(), 2 * j) *
                 (latsum::radial_sum(f0, support, lpow(fam_.L(), n), 0,
                                     opt_.sum) -
                  0.25 * a2 * lap *
                      latsum::radial_sum(f1, support, lpow(fam_.L(), n), 1,
                                         opt_.sum));
    }
    {
        const double support = support_of(j);
        const auto f = [&](double r) {
            return std::expm1(a2 * fam_.continuum_radial(j, r));
        };
        total += lpow(fam_.L(), -2 * j) * std::exp(-a2 * g0_) *
                 latsum::radial_sum(f, support, lpow(fam_.L(), j), 0,
                                    opt_.sum);
    }
    return total;
}

double Builder::w0b_moment2(int j) const {
    double total = 0.0;
    for (int n = 1; n <= j - 1; ++n) {
        const double support = support_of(n);
        const auto f = [&](double r) { return w0b_piece(j, n, r); };
        total += latsum::radial_sum(f, support, lpow(fam_.L(), n), 1,
                                    opt_.sum);
    }
    return total;
}

Row Builder::row(int j) const {
    Row r;
    r.a = compute_a(j);
    r.b = compute_b(j);
    const double eta = opt_.eta;
    const double etabar = eta - 1.0;
    r.m11 = m_diag(eta * eta, j);
    r.m22 = m_diag(etabar * etabar, j);
    r.m21 = m_offdiag(eta, j);
    r.m12 = m_offdiag(-etabar, j);
    r.e2 = e2(j);
    r.e3 = e3(j);
    r.e4 = e4(j);
    return r;
}

CoefficientTable Builder::build() const {
    CoefficientTable t;
    t.L = fam_.L();
    t.alpha2 = opt_.alpha2;
    t.eta = opt_.eta;
    t.cutoff_label = fam_.cutoff_label();
    t.j_freeze = opt_.j_freeze;
    const int cap = std::min(opt_.j_max, opt_.j_freeze);
    t.rows.reserve(std::size_t(cap) + 1);
    for (int j = 0; j <= cap; ++j) t.rows.push_back(row(j));
    return t;
}

CoefficientTable build_coefficient_table(const cov::CovarianceFamily& fam,
                                         const Options& opt) {
    return Builder(fam, opt).build();
}

ContinuumLimits compute_asymptotic_continuum(const cov::CovarianceFamily& fam,
                                             double alpha2, double eta) {
    if (std::abs(alpha2 - 8.0 * kPi) > 1e-9)
        throw std::domain_error(
            "compute_asymptotic_continuum: exact evaluation needs "
            "alpha^2 = 8 pi");
    ContinuumLimits out;
    // b: (alpha^2/2) (2pi)^-2 int d^2p [u(p)^2 - u(Lp)^2]/p^2
    //  = (alpha^2/4pi) int_0^inf dp [u(p)^2 - u(Lp)^2]/p
    {
        const auto f = [&](double p) {
            if (p <= 0.0) return 0.0;
            const double u1 = fam.cutoff_u(p);
            const double u2 = fam.cutoff_u(double(fam.L()) * p);
            return (u1 * u1 - u2 * u2) / p;
        };
        const double integral =
            special::integrate(f, 0.0, 8.0, 1e-12, 1e-300, 44) +
            special::integrate_to_inf(f, 8.0, 1e-12);
        out.b_limit = alpha2 / (4.0 * kPi) * integral;
    }
    // w(r) = r^4 e^{-alpha^2 Gamma~_{inf,0}(0|r)};
    // Gamma~_{inf,0}(0|r) = -scale_sum_excess(0, r)
    const auto w = [&](double r) {
        if (r <= 0.0) return 0.0;
        return std::pow(r, 4.0) *
               std::exp(alpha2 * fam.scale_sum_excess(0, r));
    };
    // a: (alpha^2/2) 2 pi int dt [w(e^t) - w(e^t / L)]; the integrand
    // vanishes at both ends (w(0) = 0, w(inf) finite), and the integral
    // telescopes to w(inf) ln L
    {
        const auto g = [&](double t) {
            const double r = std::exp(t);
            return w(r) - w(r / double(fam.L()));
        };
        const double integral =
            special::integrate(g, -60.0, 20.0, 1e-11, 1e-300, 44);
        out.a_limit = 0.5 * alpha2 * 2.0 * kPi * integral;
    }
    // m21 (eta = 1/2): 2 pi int dt [sqrt(w)(e^t) - sqrt(w)(e^t/L)]
    if (std::abs(eta - 0.5) < 1e-12) {
        const auto g = [&](double t) {
            const double r = std::exp(t);
            return std::sqrt(w(r)) - std::sqrt(w(r / double(fam.L())));
        };
        const double integral =
            special::integrate(g, -60.0, 20.0, 1e-11, 1e-300, 44);
        out.m21_limit = 2.0 * kPi * integral;
    }
    return out;
}

}  // namespace bkt::coeff
