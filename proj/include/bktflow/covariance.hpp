// covariance.hpp -- scale-indexed covariance family Gamma_j from the
// continuous decomposition: Gamma_j(x) = int d2p/(2pi)^2 e^{ipx}
// [u(L^j p) - u(L^{j+1} p)]/p^2, sampled on Z^2.  Exact self-similarity
// Gamma_j(y) = Gamma_0(y/L^j) and Gamma_j(0) = ln L / (2 pi) hold for
// every admissible cutoff.
#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "bktflow/simd.hpp"

namespace bkt::cov {

struct CutoffFunction {
    std::function<double(double)> u;   // radial, u(0)=1, non-increasing
    std::string label;

    static CutoffFunction gaussian();        // u(p) = exp(-p^2), closed-form kernel
    static CutoffFunction quartic();         // u(p) = (1+p^2)^-2, Hankel quadrature
};

// Lattice unit directions, mu in {+e0,-e0,+e1,-e1}
using Dir = std::array<int, 2>;
inline constexpr std::array<Dir, 4> kDirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

class CovarianceFamily {
  public:
    CovarianceFamily(int L, int j_max, CutoffFunction cutoff,
                     double tol = 1e-12, const std::string& cache_dir = "");

    int L() const { return L_; }
    int j_max() const { return j_max_; }
    double tol() const { return tol_; }
    const std::string& cutoff_label() const { return cutoff_.label; }
    bool closed_form() const { return closed_form_; }
    double cutoff_u(double p) const { return cutoff_.u(p); }

    // ln L / (2 pi), exact for any admissible cutoff
    double gamma0() const { return gamma0_; }

    // radial profile of the scale-0 kernel
    double profile(double r) const;

    // lattice kernel at scale j
    double kernel(int j, std::int64_t x0, std::int64_t x1) const;
    // continuum evaluator (real argument); for the Gaussian cutoff this
    // goes through the scale-j heat-slice formula rather than rescaling,
    // so self-similarity is a nontrivial identity to test
    double continuum(int j, double y0, double y1) const;
    double continuum_radial(int j, double r) const;

    // Gamma_j(0) - Gamma_j(r) without cancellation (the difference decays
    // like (r/L^j)^2, far below fp resolution of the values themselves
    // at large j)
    double deficit_radial(int j, double r) const;
    // analytic radial derivatives of the scale-j kernel
    double deriv1_radial(int j, double r) const;
    double deriv2_radial(int j, double r) const;

    // Gamma_{a,b}(r) = sum_{m=b}^{a} Gamma_m(r); empty sum = 0
    double partial_sum_radial(int a, int b, double r) const;

    // Gamma_{inf,n}(r|0) = sum_{m>=n} [Gamma_m(r) - Gamma_m(0)]
    double scale_sum_excess(int n, double r) const;

    // smallest radius beyond which |Gamma_j| < tol * ln L/(2 pi)
    double radius(int j) const;
    // support radius of the scale-0 profile in its own units
    double rho_max() const { return rho_max_; }

    // finite-range violation report: max |Gamma_j(x)| over |x| >= L^{j+1}/2
    double max_beyond_range() const;

    struct Fit {
        double c_tilde_e;
        double residual;
        double r_lo, r_hi;
    };
    // constant in Gamma_{inf,0}(x|0) = -(1/2pi) ln|x| + c~_E + o(1),
    // least squares with Richardson extrapolation over a geometric window
    Fit c_tilde_e_fit(double r_lo = 10.0, double r_hi = 640.0,
                      double residual_tol = 1e-6) const;
    double c_tilde_e() const;   // cached fit value

    // forward/backward lattice differences of kernel(j, .)
    double lattice_derivative(int j, std::int64_t x0, std::int64_t x1,
                              const std::vector<Dir>& dirs) const;

    void dump_csv(const std::string& path, int j_lo, int j_hi,
                  std::int64_t max_radius) const;
    // binary profile cache (little-endian f64 + JSON sidecar)
    static std::string cache_basename(const std::string& label, int L);

  private:
    void build_profile_table(const std::string& cache_dir);
    bool load_cache(const std::string& path);
    void save_cache(const std::string& path) const;
    void validate_cutoff() const;

    int L_;
    int j_max_;
    double tol_;
    CutoffFunction cutoff_;
    bool closed_form_;
    double gamma0_;
    double rho_max_;
    mutable double c_tilde_cache_ = 0.0;
    mutable bool c_tilde_valid_ = false;
    simd::HermiteTable table_;   // used for non-closed-form cutoffs
};

}  // namespace bkt::cov
