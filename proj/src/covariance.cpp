#include "bktflow/covariance.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "bktflow/special.hpp"

#include "json.hpp"

namespace bkt::cov {

using special::kPi;

CutoffFunction CutoffFunction::gaussian() {
    return {[](double p) { return std::exp(-p * p); }, "gauss"};
}

CutoffFunction CutoffFunction::quartic() {
    return {[](double p) {
                const double q = 1.0 + p * p;
                return 1.0 / (q * q);
            },
            "quartic"};
}

namespace {

// Gaussian-cutoff radial profile: heat-kernel slice over t in [1, L^2],
// (1/4pi)[E1(r^2/(4 L^2)) - E1(r^2/4)]
double gauss_profile(double r, double lsq) {
    if (r == 0.0) return std::log(lsq) / (4.0 * kPi);
    const double a = r * r / (4.0 * lsq);
    if (a >= 700.0) return 0.0;
    const double b = r * r / 4.0;
    return special::expint_e1_diff(a, b) / (4.0 * kPi);
}

}  // namespace

CovarianceFamily::CovarianceFamily(int L, int j_max, CutoffFunction cutoff,
                                   double tol, const std::string& cache_dir)
    : L_(L),
      j_max_(j_max),
      tol_(tol),
      cutoff_(std::move(cutoff)),
      closed_form_(false) {
    if (L < 2) throw std::invalid_argument("CovarianceFamily: L >= 2");
    if (j_max < 1) throw std::invalid_argument("CovarianceFamily: j_max >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("CovarianceFamily: tol > 0");
    validate_cutoff();
    gamma0_ = std::log(double(L)) / (2.0 * kPi);
    closed_form_ = (cutoff_.label == "gauss");
    if (!closed_form_) build_profile_table(cache_dir);
    // support radius of the scale-0 profile
    double rho = closed_form_ ? 2.0 * double(L) : 2.0;
    const double thresh = tol_ * gamma0_;
    while (std::abs(profile(rho)) >= thresh && rho < 1e7) rho *= 1.05;
    rho_max_ = rho;
}

void CovarianceFamily::validate_cutoff() const {
    const double u0 = cutoff_.u(0.0);
    if (std::abs(u0 - 1.0) > 1e-12)
        throw std::domain_error("cutoff: u(0) must be 1");
    double prev = u0;
    for (double p = 1e-3; p < 64.0; p *= 1.07) {
        const double v = cutoff_.u(p);
        if (v > prev + 1e-12)
            throw std::domain_error("cutoff: u must be non-increasing in |p|");
        prev = v;
    }
    const double far = cutoff_.u(64.0);
    if (std::abs(far) * (1.0 + 64.0 * 64.0 * 64.0 * 64.0) > 1e3 * 16.0)
        throw std::domain_error("cutoff: u must decay at least like 1/p^4");
}

double CovarianceFamily::profile(double r) const {
    if (closed_form_) return gauss_profile(r, double(L_) * double(L_));
    if (r >= table_.x_max()) return 0.0;
    return table_.eval(r);
}

double CovarianceFamily::kernel(int j, std::int64_t x0, std::int64_t x1) const {
    const double r = std::hypot(double(x0), double(x1));
    return continuum_radial(j, r);
}

double CovarianceFamily::continuum(int j, double y0, double y1) const {
    return continuum_radial(j, std::hypot(y0, y1));
}

double CovarianceFamily::continuum_radial(int j, double r) const {
    if (closed_form_) {
        // direct heat-slice formula at scale j (t in [L^{2j}, L^{2j+2}])
        if (r == 0.0) return gamma0_;
        const double lj = std::pow(double(L_), double(j));
        const double a = r * r / (4.0 * lj * lj * double(L_) * double(L_));
        if (a >= 700.0) return 0.0;
        if (a < 1e-290)  // r/L^j underflows; go through the stable deficit
            return gamma0_ - deficit_radial(j, r);
        const double b = r * r / (4.0 * lj * lj);
        return special::expint_e1_diff(a, b) / (4.0 * kPi);
    }
    const double lj = std::pow(double(L_), double(j));
    return profile(r / lj);
}

double CovarianceFamily::deficit_radial(int j, double r) const {
    if (r == 0.0) return 0.0;
    if (closed_form_) {
        // int_{T1}^{T2} (1 - e^{-r^2/4t}) dt/(4 pi t) through the entire
        // part of E1; stable for any argument size
        const double lj = std::pow(double(L_), double(j));
        const double t1 = lj * lj;
        const double t2 = t1 * double(L_) * double(L_);
        const double a = r * r / (4.0 * t2);
        const double b = r * r / (4.0 * t1);
        return (special::en_integral(a) - special::en_integral(b)) /
               (4.0 * kPi);
    }
    return gamma0_ - continuum_radial(j, r);
}

double CovarianceFamily::deriv1_radial(int j, double r) const {
    const double lj = std::pow(double(L_), double(j));
    if (closed_form_) {
        const double t1 = lj * lj;
        const double t2 = t1 * double(L_) * double(L_);
        if (r < 1e-5 * lj)
            return -r * (1.0 / t1 - 1.0 / t2) / (8.0 * kPi);
        const double a = r * r / (4.0 * t2);
        const double b = r * r / (4.0 * t1);
        const double eb = b < 700.0 ? std::exp(-b) : 0.0;
        const double ea = a < 700.0 ? std::exp(-a) : 0.0;
        return (eb - ea) / (2.0 * kPi * r);
    }
    // table-backed cutoffs: the stored derivative array interpolated
    const double rho = r / lj;
    if (rho >= table_.x_max()) return 0.0;
    const double u = rho * table_.inv_dx;
    const std::size_t i =
        std::min(std::size_t(u), table_.size() - 2);
    const double w = u - double(i);
    return ((1.0 - w) * table_.deriv[i] + w * table_.deriv[i + 1]) / lj;
}

double CovarianceFamily::deriv2_radial(int j, double r) const {
    const double lj = std::pow(double(L_), double(j));
    if (closed_form_) {
        const double t1 = lj * lj;
        const double t2 = t1 * double(L_) * double(L_);
        if (r < 1e-5 * lj)
            return -(1.0 / t1 - 1.0 / t2) / (8.0 * kPi);
        const double a = r * r / (4.0 * t2);
        const double b = r * r / (4.0 * t1);
        const double eb = b < 700.0 ? std::exp(-b) : 0.0;
        const double ea = a < 700.0 ? std::exp(-a) : 0.0;
        return -(eb / t1 - ea / t2) / (4.0 * kPi) -
               (eb - ea) / (2.0 * kPi * r * r);
    }
    const double h = table_.dx * lj;
    return (deriv1_radial(j, r + h) - deriv1_radial(j, std::max(r - h, 0.0))) /
           (r + h - std::max(r - h, 0.0));
}

double CovarianceFamily::partial_sum_radial(int a, int b, double r) const {
    double s = 0.0;
    for (int m = b; m <= a; ++m) s += continuum_radial(m, r);
    return s;
}

double CovarianceFamily::scale_sum_excess(int n, double r) const {
    if (r == 0.0) return 0.0;
    const double ln = std::pow(double(L_), double(n));
    const double rho = r / ln;
    if (closed_form_) {
        // telescoped slice: int_1^inf dt (e^{-rho^2/4t} - 1)/(4 pi t)
        return special::en_integral(rho * rho / 4.0) / (4.0 * kPi);
    }
    // generic: sum profiles until the excess term is below tolerance
    double s = 0.0;
    double scale = 1.0;
    for (int m = 0; m < 200; ++m) {
        const double term = profile(rho / scale) - gamma0_;
        s += term;
        scale *= double(L_);
        if (m > 2 && std::abs(term) < 1e-3 * tol_) break;
    }
    return s;
}

double CovarianceFamily::radius(int j) const {
    return rho_max_ * std::pow(double(L_), double(j));
}

double CovarianceFamily::max_beyond_range() const {
    // self-similar: same number for every j
    double m = 0.0;
    for (double r = double(L_) / 2.0; r <= rho_max_ * 1.2; r *= 1.01)
        m = std::max(m, std::abs(profile(r)));
    return m;
}

CovarianceFamily::Fit CovarianceFamily::c_tilde_e_fit(double r_lo, double r_hi,
                                                      double residual_tol) const {
    // c(r) = Gamma_{inf,0}(r|0) + ln r/(2 pi); Richardson in r removes the
    // leading O(r^-2) correction of non-closed-form cutoffs
    std::vector<double> cs;
    for (double r = r_lo; r <= r_hi * 0.5000001; r *= std::sqrt(2.0)) {
        const double c1 = scale_sum_excess(0, r) + std::log(r) / (2.0 * kPi);
        const double c2 =
            scale_sum_excess(0, 2.0 * r) + std::log(2.0 * r) / (2.0 * kPi);
        cs.push_back((4.0 * c2 - c1) / 3.0);
    }
    if (cs.empty()) throw std::runtime_error("c_tilde_e_fit: empty window");
    double mean = 0.0;
    for (double c : cs) mean += c;
    mean /= double(cs.size());
    double res = 0.0;
    for (double c : cs) res = std::max(res, std::abs(c - mean));
    if (res > residual_tol)
        throw std::runtime_error("c_tilde_e_fit: fit residual above tolerance");
    return Fit{mean, res, r_lo, r_hi};
}

double CovarianceFamily::c_tilde_e() const {
    if (!c_tilde_valid_) {
        c_tilde_cache_ = c_tilde_e_fit().c_tilde_e;
        c_tilde_valid_ = true;
    }
    return c_tilde_cache_;
}

double CovarianceFamily::lattice_derivative(int j, std::int64_t x0,
                                            std::int64_t x1,
                                            const std::vector<Dir>& dirs) const {
    if (dirs.empty() || dirs.size() > 2)
        throw std::domain_error("lattice_derivative: 1 or 2 directions");
    const double rad = radius(j) + 4.0;
    if (std::hypot(double(x0), double(x1)) > rad)
        throw std::domain_error("lattice_derivative: point beyond radius(j)");
    // d^mu f(x) = f(x+mu) - f(x) for +e; f(x) - f(x+mu) for -e
    const auto apply = [&](const std::function<double(std::int64_t, std::int64_t)>& f,
                           Dir d, std::int64_t a, std::int64_t b) {
        const bool positive = (d[0] + d[1]) > 0;
        if (positive) return f(a + d[0], b + d[1]) - f(a, b);
        return f(a, b) - f(a + d[0], b + d[1]);
    };
    const auto base = [&](std::int64_t a, std::int64_t b) {
        return kernel(j, a, b);
    };
    if (dirs.size() == 1) return apply(base, dirs[0], x0, x1);
    const auto first = [&](std::int64_t a, std::int64_t b) {
        return apply(base, dirs[1], a, b);
    };
    return apply(first, dirs[0], x0, x1);
}

void CovarianceFamily::build_profile_table(const std::string& cache_dir) {
    namespace fs = std::filesystem;
    std::string cache_path;
    if (!cache_dir.empty()) {
        fs::create_directories(cache_dir);
        cache_path = cache_dir + "/" + cache_basename(cutoff_.label, L_);
        if (load_cache(cache_path)) return;
    }
    // Hankel transform: Gamma_0(r) = (1/2pi) int_0^inf dp J0(p r)
    //                                 [u(p) - u(L p)]/p
    // Tail beyond the cutoff scale: half-period segments of the J0
    // oscillation, Euler-averaged when the segment sums alternate.
    const auto gamma = [&](double r) {
        const auto f = [&](double p) {
            if (p < 1e-12) return 0.0;
            const double num = cutoff_.u(p) - cutoff_.u(double(L_) * p);
            return special::bessel_j0(p * r) * num / p;
        };
        // one Kronrod panel per half period of J0 up to the cutoff scale,
        // then Euler averaging over the alternating tail segments
        const double step = kPi / std::max(r, 0.05);
        double total = 0.0;
        double a = 0.0;
        while (a < 8.0) {
            const double b = std::min(a + step, 8.0);
            total += special::integrate(f, a, b, 1e-13, 1e-16, 3);
            a = b;
        }
        constexpr int kSegs = 48;
        double seg_val[kSegs];
        double partial[kSegs];
        double run = total;
        for (int k = 0; k < kSegs; ++k) {
            seg_val[k] =
                special::integrate(f, a + step * double(k),
                                   a + step * double(k + 1), 1e-12, 1e-16, 3);
            run += seg_val[k];
            partial[k] = run;
        }
        bool alternating = true;
        for (int k = kSegs - 8; k < kSegs - 1; ++k)
            if (seg_val[k] * seg_val[k + 1] > 0.0) alternating = false;
        if (!alternating) return partial[kSegs - 1] / (2.0 * kPi);
        // repeated averaging of the last partial sums
        double row[16];
        for (int i = 0; i < 16; ++i) row[i] = partial[kSegs - 16 + i];
        for (int lvl = 0; lvl < 15; ++lvl)
            for (int i = 0; i < 15 - lvl; ++i)
                row[i] = 0.5 * (row[i] + row[i + 1]);
        return row[0] / (2.0 * kPi);
    };
    // locate the support radius first (exponential decay for analytic u)
    double r_max = 4.0;
    while (std::abs(gamma(r_max)) > 0.3 * tol_ * gamma0_ && r_max < 4096.0)
        r_max *= 1.5;
    const double dr = 1.0 / 16.0;
    const std::size_t n = std::size_t(r_max / dr) + 2;
    table_.x0 = 0.0;
    table_.dx = dr;
    table_.inv_dx = 1.0 / dr;
    table_.value.resize(n);
    table_.deriv.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = dr * double(i);
        table_.value[i] = (i == 0) ? gamma0_ : gamma(r);
    }
    // 4th-order finite-difference derivatives
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = [&](std::ptrdiff_t k) {
            const std::ptrdiff_t q =
                std::clamp<std::ptrdiff_t>(std::ptrdiff_t(i) + k, 0,
                                           std::ptrdiff_t(n) - 1);
            return table_.value[std::size_t(q)];
        };
        table_.deriv[i] =
            (v(-2) - 8.0 * v(-1) + 8.0 * v(1) - v(2)) / (12.0 * dr);
    }
    if (!cache_path.empty()) save_cache(cache_path);
}

std::string CovarianceFamily::cache_basename(const std::string& label, int L) {
    return "gamma0_" + label + "_L" + std::to_string(L) + "_v1.bin";
}

bool CovarianceFamily::load_cache(const std::string& path) {
    std::ifstream side(path + ".json");
    if (!side) return false;
    nlohmann::json j;
    side >> j;
    if (j.value("L", -1) != L_ || j.value("cutoff_label", "") != cutoff_.label)
        return false;
    if (std::abs(j.value("tol", 0.0) - tol_) > 0.0) return false;
    const std::size_t n = j.value("nodes", std::size_t(0));
    std::ifstream bin(path, std::ios::binary);
    if (!bin) return false;
    table_.x0 = 0.0;
    table_.dx = j.value("dr", 1.0 / 64.0);
    table_.inv_dx = 1.0 / table_.dx;
    table_.value.resize(n);
    table_.deriv.resize(n);
    bin.read(reinterpret_cast<char*>(table_.value.data()),
             std::streamsize(n * sizeof(double)));
    bin.read(reinterpret_cast<char*>(table_.deriv.data()),
             std::streamsize(n * sizeof(double)));
    return bool(bin);
}

void CovarianceFamily::save_cache(const std::string& path) const {
    std::ofstream bin(path, std::ios::binary);
    bin.write(reinterpret_cast<const char*>(table_.value.data()),
              std::streamsize(table_.value.size() * sizeof(double)));
    bin.write(reinterpret_cast<const char*>(table_.deriv.data()),
              std::streamsize(table_.deriv.size() * sizeof(double)));
    nlohmann::json j;
    j["L"] = L_;
    j["j"] = 0;
    j["radius"] = table_.x_max();
    j["cutoff_label"] = cutoff_.label;
    j["tol"] = tol_;
    j["dr"] = table_.dx;
    j["nodes"] = table_.value.size();
    std::ofstream side(path + ".json");
    side << j.dump(2) << "\n";
}

void CovarianceFamily::dump_csv(const std::string& path, int j_lo, int j_hi,
                                std::int64_t max_radius) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_csv: cannot open " + path);
    out << "# L=" << L_ << " cutoff=" << cutoff_.label << " tol=" << tol_
        << "\n";
    out << "j,x0,x1,gamma\n";
    char buf[96];
    for (int j = j_lo; j <= j_hi; ++j) {
        const std::int64_t r =
            std::min<std::int64_t>(max_radius, std::int64_t(radius(j)) + 1);
        for (std::int64_t x1 = -r; x1 <= r; ++x1)
            for (std::int64_t x0 = -r; x0 <= r; ++x0) {
                std::snprintf(buf, sizeof buf, "%d,%lld,%lld,%.17g\n", j,
                              static_cast<long long>(x0),
                              static_cast<long long>(x1), kernel(j, x0, x1));
                out << buf;
            }
    }
}

}  // namespace bkt::cov
