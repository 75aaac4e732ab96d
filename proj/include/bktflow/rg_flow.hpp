// rg_flow.hpp -- second-order coupling flow, BKT separatrix shooting,
// free energy accumulation, and the continuum Kosterlitz ODE.
#pragma once

#include <string>
#include <vector>

#include "bktflow/covariance.hpp"
#include "bktflow/rg_coefficients.hpp"

namespace bkt::flow {

enum class Side { undecided, plasma_side, dipole_side, on_separatrix };

struct CouplingState {
    int j = 0;
    double s = 0.0;
    double z = 0.0;
    long double e = 0.0L;   // free-energy accumulator (extended precision)
    Side tag = Side::undecided;
};

struct CouplingTrajectory {
    std::vector<CouplingState> states;
    double q1 = 0.0;         // sqrt(ab) z_1

    double q(int j) const {  // q_j = q1 / (1 + |q1|(j-1)), j >= 1
        return q1 / (1.0 + std::abs(q1) * double(j - 1));
    }
    void write_csv(const std::string& path) const;
};

// One step of (s,z,E): s' = s - a_j z^2, z' = L^2 e^{-a2/2 Gamma_j(0)}
// (z - b_j s z), E' = E + L^{-2j}(s E2 + s^2 E3 + z^2 E4)
CouplingState flow_step(const CouplingState& state,
                        const coeff::CoefficientTable& coeffs,
                        const cov::CovarianceFamily& fam, double alpha2);

struct ShootOptions {
    int j_max = 240;
    double tol = 1e-16;         // bracket width (absolute)
    double delta = 1e-12;       // plasma classification threshold on s
    double eps_z_rel = 1e-15;   // dipole: z below eps_z_rel * z0
    double s_hi_factor = 8.0;   // initial bracket top = factor*sqrt(a/b)*z0
    int max_expand = 60;
};

struct ShootResult {
    double s_of_z = 0.0;
    double bracket_width = 0.0;
    int iterations = 0;
    CouplingTrajectory trajectory;  // run from the midpoint
};

// Bisection on s0: low endpoints flow to the plasma side, high ones to
// the dipole side; the midpoint trajectory tracks q_j.
ShootResult shoot_separatrix(double z0, const coeff::CoefficientTable& coeffs,
                             const cov::CovarianceFamily& fam, double alpha2,
                             const ShootOptions& opt = {});

CouplingTrajectory run_flow(double s0, double z0,
                            const coeff::CoefficientTable& coeffs,
                            const cov::CovarianceFamily& fam, double alpha2,
                            int j_max);

// beta_alpha(z) = alpha^2 / (1 - s(z))
double beta_bkt(double s_of_z, double alpha2);

// p(beta,z) = -(1/2beta) ln(1-s(z)) - (1/beta) sum_j (E_{j+1}-E_j)
double free_energy(const CouplingTrajectory& traj, double beta);

struct OdeState {
    double ell = 0.0;
    double s = 0.0;
    double z = 0.0;
    double invariant = 0.0;  // s^2 - 4 pi^2 e^{8 pi c_E} z^2
};

// RK4 for ds/dl = -8 pi^2 e^{8 pi c_E} z^2, dz/dl = -2 s z, with the
// lattice constant c_E
std::vector<OdeState> kosterlitz_integrate(double s0, double z0,
                                           double ell_end, double h);
void write_ode_csv(const std::vector<OdeState>& orbit,
                   const std::string& path);

// kappa(beta_eff, eta) of the correlation decay
double exponent_table(double beta_eff, double eta);

}  // namespace bkt::flow
