// charge_flow.hpp -- fractional-charge renormalization flow (Z_j, Zbar_j),
// the two-state jump-process matrix Q(j, j0), and the constant c(eta).
#pragma once

#include <string>
#include <vector>

#include "bktflow/covariance.hpp"
#include "bktflow/rg_coefficients.hpp"
#include "bktflow/rg_flow.hpp"

namespace bkt::charge {

// signed log-domain number: value = sign * exp(log_abs); sign 0 => zero
struct LogSigned {
    double log_abs = 0.0;
    int sign = 0;

    static LogSigned zero() { return {0.0, 0}; }
    static LogSigned one() { return {0.0, 1}; }
    static LogSigned from(double x);
    double value() const;   // may overflow to +-inf by design
    LogSigned scaled(double factor) const;  // multiply by a real factor
};

LogSigned log_add(const LogSigned& a, const LogSigned& b);

struct RenormState {
    int j = 0;
    LogSigned z;      // Z_j
    LogSigned zbar;   // Zbar_j
    double g = 0.0;   // g_j = -pi sum_k [Gamma_k(0) - lnL/2pi]; identically 0
                      // for every continuum cutoff (Frullani)
};

struct ChargeTrajectory {
    double eta = 0.0;
    std::vector<RenormState> states;

    // ln Z^+_j, ln Z^-_j (Z+- = Z +- Zbar)
    LogSigned zplus(int j) const;
    LogSigned zminus(int j) const;
    void write_csv(const std::string& path,
                   const flow::CouplingTrajectory& coupling) const;
};

// One linear-domain step (tests; overflows by j ~ hundreds)
void charge_step_linear(double& z, double& zbar, int j, double s_j,
                        double zj, const coeff::CoefficientTable& coeffs,
                        const cov::CovarianceFamily& fam, double alpha2,
                        double eta);

// Log-domain flow along a coupling trajectory.  Initial data
// (Z_0, Zbar_0) = (1, 0).  For eta > 1/2 the mirrored problem
// (eta <-> 1-eta, Z <-> Zbar) is run internally.
ChargeTrajectory run_charge_flow(const flow::CouplingTrajectory& coupling,
                                 const coeff::CoefficientTable& coeffs,
                                 const cov::CovarianceFamily& fam,
                                 double alpha2, double eta, int j_end);

struct QMatrix {
    double q[2][2] = {{0, 0}, {0, 0}};
    int j0 = 0;
    int j = 0;
};

struct JumpInputs {
    const flow::CouplingTrajectory* coupling = nullptr;
    const coeff::CoefficientTable* coeffs = nullptr;
    const cov::CovarianceFamily* fam = nullptr;
    double alpha2 = 0.0;
    double eta = 0.0;  // must be in (0, 1/2)
};

// per-scale jump costs l_n, m_{+,n}, m_{-,n} and the log-correction m_n
struct JumpCosts {
    double ell = 0.0;
    double m_plus = 0.0;
    double m_minus = 0.0;
    double m_log = 0.0;
};
JumpCosts jump_costs(int n, const JumpInputs& in);

// Q(j, j0) = prod_{n=j0}^{j} [[1, m_{-,n}], [m_{+,n}, l_n]]
QMatrix q_matrix(int j, int j0, const JumpInputs& in);

// first n >= 1 with l_n <= L^{-(etabar^2 - eta^2)}
int adaptive_j0(const JumpInputs& in, int j_cap);

// c(eta) = sum_{n>=0} L^{-2n} e^{-4pi(etabar^2-eta^2) Gamma_{n-1,0}(0)}
//          sum_y e^{-etabar a2 Gamma_{inf,n+1}(y|0)} e^{etabar a2 Gamma_n(0)}
//          (e^{-etabar a2 Gamma_n(y)} - 1)
double c_eta(const cov::CovarianceFamily& fam, double alpha2, double eta,
             const latsum::Options& sum_opt, double series_tol = 1e-12);

}  // namespace bkt::charge
