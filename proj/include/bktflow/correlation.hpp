// correlation.hpp -- fractional-charge correlation from the charge flow:
// the w2 scale series, closed asymptotic formulas with logarithmic
// corrections, and exponent fits.
#pragma once

#include <string>
#include <vector>

#include "bktflow/charge_flow.hpp"

namespace bkt::corr {

// w^-_{2,a}(x) = (1/2) sum_{n>=n0} Z_n^2 L^{-4n}
//   e^{eta^2 a2 Gamma_{inf,n+1}(x|0)} e^{-eta^2 a2 Gamma_n(0)}
//   (e^{eta^2 a2 Gamma_n(x)} - 1),  n0 = floor(log_L x)
// barred = true evaluates the (Zbar, etabar) variant.
double w2a_series(double x_radius, const charge::ChargeTrajectory& traj,
                  const cov::CovarianceFamily& fam, double alpha2, double eta,
                  bool barred, double tol = 1e-14);

// rho_eta(x) = 2 w2a + 2 w2abar (w2b = 0 identically, w2c dropped at
// second order)
double rho_eta(double x_radius, const charge::ChargeTrajectory& traj,
               const cov::CovarianceFamily& fam, double alpha2, double eta);

struct AsymptoticConstants {
    double additive_const = 0.0;  // c~_E of the family (lattice c_E for the
                                  // exact decomposition)
    double gamma0 = 0.0;          // Gamma_0(0)
    double c_eta = 0.0;           // only used for eta != 1/2
    double L = 0.0;
    // eta = 1/2 mirror bracket: rho carries (Z+^2 + Z-^2)-weights, so the
    // second-order formula keeps 1 + r_minus^2 (1 + f ln x)^{-2}; with
    // r_minus = Z^-_1/Z^+_1 -> 1 as z -> 0 this is the term that restores
    // the free-case prefactor. r_minus = 0 reproduces the bare form.
    double r_minus = 0.0;
    // second-order value of the amplitude constant (e^{2 c_+} from the
    // Z^+ drift tail; the f_a-type correction), 1 = bare form
    double prefactor_scale = 1.0;
};

// f = 4 pi e^{4 pi c~_E} L^2 e^{-4 pi Gamma_0(0)} z
double log_correction_f(const AsymptoticConstants& consts, double z);

struct AsymptoticValue {
    double rho = 0.0;
    double branch_a = 0.0;  // |x|^{-4 eta^2} branch
    double branch_b = 0.0;  // |x|^{-4 etabar^2} branch (eta != 1/2)
};

// Closed second-order asymptotic formula (f_a = f~_b = 0)
AsymptoticValue asymptotic_formula(double x, double z, double eta,
                                   const AsymptoticConstants& consts);

struct ProfilePoint {
    double x = 0.0;
    double rho = 0.0;
    std::string branch = "total";
};

struct CorrelationProfile {
    std::vector<ProfilePoint> points;
    double eta = 0.0;
    double z = 0.0;
    int L = 0;
    std::string source;  // series | asymptotic | free | oracle

    void write_csv(const std::string& path) const;
};

enum class FitModel { pure_power, power_log };

struct AsymptoticFit {
    double power = 0.0;      // fitted exponent of |x|
    double logexp = 0.0;     // fitted exponent of (1 + f ln|x|)
    double prefactor = 0.0;
    double residual = 0.0;   // rms of ln-residuals
    FitModel model = FitModel::pure_power;
};

// least squares in log-log coordinates; power_log fits
// ln rho = c - p ln x + q ln(1 + f ln x) with f fixed
AsymptoticFit fit_exponents(const CorrelationProfile& profile, FitModel model,
                            double f = 0.0);

std::string fit_to_json(const AsymptoticFit& fit);

}  // namespace bkt::corr
