#include "bktflow/rg_flow.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "bktflow/lattice_green.hpp"
#include "bktflow/special.hpp"

namespace bkt::flow {

using special::kPi;

CouplingState flow_step(const CouplingState& state,
                        const coeff::CoefficientTable& coeffs,
                        const cov::CovarianceFamily& fam, double alpha2) {
    const coeff::Row& row = coeffs.at(state.j);
    const double pref =
        double(fam.L()) * double(fam.L()) *
        std::exp(-0.5 * alpha2 * fam.gamma0());
    CouplingState next;
    next.j = state.j + 1;
    next.s = state.s - row.a * state.z * state.z;
    next.z = pref * (state.z - row.b * state.s * state.z);
    const double l2j = std::pow(double(fam.L()), -2.0 * double(state.j));
    next.e = state.e +
             (long double)(l2j * (state.s * row.e2 +
                                  state.s * state.s * row.e3 +
                                  state.z * state.z * row.e4));
    next.tag = state.tag;
    return next;
}

CouplingTrajectory run_flow(double s0, double z0,
                            const coeff::CoefficientTable& coeffs,
                            const cov::CovarianceFamily& fam, double alpha2,
                            int j_max) {
    CouplingTrajectory traj;
    traj.states.reserve(std::size_t(j_max) + 1);
    CouplingState st;
    st.s = s0;
    st.z = z0;
    traj.states.push_back(st);
    for (int j = 0; j < j_max; ++j) {
        st = flow_step(st, coeffs, fam, alpha2);
        traj.states.push_back(st);
    }
    const double z1 = traj.states.size() > 1 ? traj.states[1].z : z0;
    traj.q1 = std::sqrt(coeffs.a_inf() * coeffs.b_inf()) * z1;
    return traj;
}

namespace {

Side classify(double s0, double z0, const coeff::CoefficientTable& coeffs,
              const cov::CovarianceFamily& fam, double alpha2,
              const ShootOptions& opt, double q1) {
    CouplingState st;
    st.s = s0;
    st.z = z0;
    const double b = coeffs.b_inf();
    const double eps_z = opt.eps_z_rel * std::abs(z0);
    const double q_end =
        q1 / (1.0 + std::abs(q1) * double(opt.j_max - 1));
    const double eps_s = q_end / (10.0 * b);
    for (int j = 0; j < opt.j_max; ++j) {
        st = flow_step(st, coeffs, fam, alpha2);
        if (st.s < -opt.delta) return Side::plasma_side;
        if (std::abs(st.z) < eps_z && st.s > eps_s) return Side::dipole_side;
        if (!std::isfinite(st.s) || !std::isfinite(st.z))
            return Side::plasma_side;
    }
    // undecided at j_max: compare against the separatrix tracking curve
    return (st.s * b > std::abs(q_end)) ? Side::dipole_side
                                        : Side::plasma_side;
}

}  // namespace

ShootResult shoot_separatrix(double z0, const coeff::CoefficientTable& coeffs,
                             const cov::CovarianceFamily& fam, double alpha2,
                             const ShootOptions& opt) {
    if (!(z0 >= 0.0)) throw std::domain_error("shoot_separatrix: z0 >= 0");
    ShootResult res;
    if (z0 == 0.0) {
        res.s_of_z = 0.0;  // the BKT point at z=0 is beta = alpha^2, s = 0
        res.trajectory = run_flow(0.0, 0.0, coeffs, fam, alpha2, opt.j_max);
        return res;
    }
    const double a = coeffs.a_inf();
    const double b = coeffs.b_inf();
    const double q1 = std::sqrt(a * b) * z0;
    double lo = 0.0;
    double hi = opt.s_hi_factor * std::sqrt(a / b) * z0;
    Side side_lo = classify(lo, z0, coeffs, fam, alpha2, opt, q1);
    Side side_hi = classify(hi, z0, coeffs, fam, alpha2, opt, q1);
    int expand = 0;
    while (side_hi != Side::dipole_side && expand < opt.max_expand) {
        hi *= 2.0;
        side_hi = classify(hi, z0, coeffs, fam, alpha2, opt, q1);
        ++expand;
    }
    if (side_lo != Side::plasma_side || side_hi != Side::dipole_side)
        throw std::runtime_error(
            "shoot_separatrix: no sign change in bracket (lo=" +
            std::to_string(int(side_lo)) +
            ", hi=" + std::to_string(int(side_hi)) + ")");
    int iters = 0;
    while (hi - lo > opt.tol && iters < 200) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;  // bisection hit ulp resolution
        const Side side =
            classify(mid, z0, coeffs, fam, alpha2, opt, q1);
        if (side == Side::plasma_side)
            lo = mid;
        else
            hi = mid;
        ++iters;
    }
    res.s_of_z = 0.5 * (lo + hi);
    res.bracket_width = hi - lo;
    res.iterations = iters;
    res.trajectory =
        run_flow(res.s_of_z, z0, coeffs, fam, alpha2, opt.j_max);
    for (auto& st : res.trajectory.states) st.tag = Side::on_separatrix;
    return res;
}

double beta_bkt(double s_of_z, double alpha2) {
    if (s_of_z >= 1.0) throw std::domain_error("beta_bkt: s(z) must be < 1");
    return alpha2 / (1.0 - s_of_z);
}

double free_energy(const CouplingTrajectory& traj, double beta) {
    if (traj.states.empty()) throw std::domain_error("free_energy: empty");
    // divergence guard: energy increments must eventually decrease
    long double prev_inc = 0.0L;
    int growing = 0;
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
        const long double inc =
            traj.states[k].e - traj.states[k - 1].e;
        if (k > 8 && std::abs((double)inc) > std::abs((double)prev_inc) &&
            std::abs((double)inc) > 1e-14)
            ++growing;
        else
            growing = 0;
        if (growing > 6)
            throw std::runtime_error("free_energy: divergent E-series");
        prev_inc = inc;
    }
    const double s0 = traj.states.front().s;
    const long double e_sum = traj.states.back().e - traj.states.front().e;
    return -std::log1p(-s0) / (2.0 * beta) - double(e_sum) / beta;
}

std::vector<OdeState> kosterlitz_integrate(double s0, double z0,
                                           double ell_end, double h) {
    if (!(h > 0.0)) throw std::domain_error("kosterlitz_integrate: h > 0");
    const double c_e = green::euler_constant();
    const double amp = 8.0 * kPi * kPi * std::exp(8.0 * kPi * c_e);
    const auto inv = [&](double s, double z) {
        return s * s - 0.5 * amp * z * z;  // 4 pi^2 e^{8 pi c_E} = amp/2
    };
    std::vector<OdeState> orbit;
    const std::size_t n = std::size_t(ell_end / h + 0.5);
    orbit.reserve(n + 1);
    double s = s0, z = z0, ell = 0.0;
    orbit.push_back({ell, s, z, inv(s, z)});
    const auto fs = [&](double /*s*/, double zz) { return -amp * zz * zz; };
    const auto fz = [&](double ss, double zz) { return -2.0 * ss * zz; };
    for (std::size_t k = 0; k < n; ++k) {
        const double k1s = fs(s, z), k1z = fz(s, z);
        const double k2s = fs(s + 0.5 * h * k1s, z + 0.5 * h * k1z);
        const double k2z = fz(s + 0.5 * h * k1s, z + 0.5 * h * k1z);
        const double k3s = fs(s + 0.5 * h * k2s, z + 0.5 * h * k2z);
        const double k3z = fz(s + 0.5 * h * k2s, z + 0.5 * h * k2z);
        const double k4s = fs(s + h * k3s, z + h * k3z);
        const double k4z = fz(s + h * k3s, z + h * k3z);
        s += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
        z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        ell += h;
        if (!std::isfinite(s) || !std::isfinite(z))
            throw std::runtime_error("kosterlitz_integrate: overflow");
        orbit.push_back({ell, s, z, inv(s, z)});
    }
    return orbit;
}

void write_ode_csv(const std::vector<OdeState>& orbit,
                   const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_ode_csv: cannot open " + path);
    out << "ell,s,z,invariant\n";
    char buf[128];
    for (const auto& st : orbit) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", st.ell,
                      st.s, st.z, st.invariant);
        out << buf;
    }
}

double exponent_table(double beta_eff, double eta) {
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::domain_error("exponent_table: eta in (0,1]");
    if (eta == 1.0) return 4.0;
    const double x = eta <= 0.5 ? eta : 1.0 - eta;
    return beta_eff / (4.0 * kPi) * x * x;
}

void CouplingTrajectory::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    out << "j,s,z,E,q\n";
    char buf[160];
    for (std::size_t k = 0; k < states.size(); ++k) {
        const auto& st = states[k];
        const double qk = k >= 1 ? q(int(k)) : 0.0;
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", st.j,
                      st.s, st.z, double(st.e), qk);
        out << buf;
    }
}

}  // namespace bkt::flow
