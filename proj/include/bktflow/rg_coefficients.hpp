// rg_coefficients.hpp -- per-scale flow coefficients a_j, b_j, m_{p,q,j},
// E2/E3/E4 as truncated lattice sums over the covariance family, the
// w-kernel families, and the continuum limits they converge to.
#pragma once

#include <string>
#include <vector>

#include "bktflow/covariance.hpp"
#include "bktflow/latsum.hpp"

namespace bkt::coeff {

struct Options {
    double alpha2 = 8.0 * 3.14159265358979323846;
    double eta = 0.5;
    int j_max = 8;        // rows built for j = 0..j_max
    int j_freeze = 12;    // rows clamp here (convergence rate beats need)
    latsum::Options sum;  // truncation and routing controls
    double support_scale = 1.0;  // multiplies the kernel support (tests)
};

struct Row {
    double a = 0.0, b = 0.0;
    double m11 = 0.0, m22 = 0.0, m12 = 0.0, m21 = 0.0;
    double e2 = 0.0, e3 = 0.0, e4 = 0.0;
};

struct CoefficientTable {
    int L = 0;
    double alpha2 = 0.0;
    double eta = 0.0;
    std::string cutoff_label;
    int j_freeze = 0;
    std::vector<Row> rows;

    // frozen accessor: rows beyond the built range repeat the last row
    const Row& at(int j) const;
    double a_inf() const { return rows.back().a; }
    double b_inf() const { return rows.back().b; }
    void write_csv(const std::string& path) const;
};

class Builder {
  public:
    Builder(const cov::CovarianceFamily& fam, Options opt);

    CoefficientTable build() const;
    Row row(int j) const;

    double compute_a(int j) const;
    double compute_b(int j) const;
    // off-diagonal charge coefficient at probe charge xi; m21 = xi=eta,
    // m12 = xi = 1 - eta
    double m_offdiag(double xi, int j) const;
    double m_diag(double eta_sq, int j) const;   // m11 (eta^2) / m22 (etabar^2)
    double e2(int j) const;
    double e3(int j) const;
    double e4(int j) const;

    // w-kernel family, pointwise (tests and dumps)
    double w0a(int j, int n_lo, double y0, double y1, cov::Dir mu,
               cov::Dir nu) const;
    double w0b(int j, double r) const;
    double w0c(int j, double r) const;
    double w0d(int j, double r, cov::Dir mu, double y0, double y1) const;
    double w0e(int j, double y0, double y1) const;
    double w1c(double xi, int j, double r) const;

    // Sum_y |y|^2 w0b_j(y) through the production path (oracle target)
    double w0b_moment2(int j) const;

    const Options& options() const { return opt_; }

  private:
    double w0b_piece(int j, int n, double r) const;  // scale-n term of w0b
    latsum::Kernel kernel_of(int scale) const;
    double support_of(int scale) const;
    double grad_s(int j) const;                      // S_j
    double grad_c(int n, int j) const;               // C_{j,n}
    double grad2_t(int n, int j) const;

    const cov::CovarianceFamily& fam_;
    Options opt_;
    double g0_;
    mutable std::vector<double> s_cache_;            // S_j
    mutable std::vector<std::vector<double>> c_cache_, t_cache_;
};

CoefficientTable build_coefficient_table(const cov::CovarianceFamily& fam,
                                         const Options& opt);

struct ContinuumLimits {
    double a_limit = 0.0;
    double b_limit = 0.0;
    double m21_limit = 0.0;  // eta = 1/2 only
};

// One-dimensional radial integrals of the continuum theory at
// alpha^2 = 8 pi; the targets a_j, b_j, m_{+-,j} converge to.
ContinuumLimits compute_asymptotic_continuum(const cov::CovarianceFamily& fam,
                                             double alpha2, double eta);

}  // namespace bkt::coeff
