#include "bktflow/charge_flow.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "bktflow/special.hpp"

namespace bkt::charge {

using special::kPi;

LogSigned LogSigned::from(double x) {
    if (x == 0.0) return zero();
    return {std::log(std::abs(x)), x > 0.0 ? 1 : -1};
}

double LogSigned::value() const {
    if (sign == 0) return 0.0;
    return double(sign) * std::exp(log_abs);
}

LogSigned LogSigned::scaled(double factor) const {
    if (sign == 0 || factor == 0.0) return zero();
    return {log_abs + std::log(std::abs(factor)),
            factor > 0.0 ? sign : -sign};
}

LogSigned log_add(const LogSigned& a, const LogSigned& b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    const LogSigned& big = a.log_abs >= b.log_abs ? a : b;
    const LogSigned& small = a.log_abs >= b.log_abs ? b : a;
    const double d = small.log_abs - big.log_abs;  // <= 0
    if (a.sign == b.sign)
        return {big.log_abs + std::log1p(std::exp(d)), big.sign};
    const double m = -std::expm1(d);  // 1 - e^d in (0,1]
    if (m == 0.0) return LogSigned::zero();
    return {big.log_abs + std::log(m), big.sign};
}

LogSigned ChargeTrajectory::zplus(int j) const {
    const auto& st = states.at(std::size_t(j));
    return log_add(st.z, st.zbar);
}

LogSigned ChargeTrajectory::zminus(int j) const {
    const auto& st = states.at(std::size_t(j));
    return log_add(st.z, st.zbar.scaled(-1.0));
}

void charge_step_linear(double& z, double& zbar, int j, double s_j,
                        double zj, const coeff::CoefficientTable& coeffs,
                        const cov::CovarianceFamily& fam, double alpha2,
                        double eta) {
    const coeff::Row& row = coeffs.at(j);
    const double etabar = eta - 1.0;
    const double l2 = double(fam.L()) * double(fam.L());
    const double pz = l2 * std::exp(-eta * eta * 0.5 * alpha2 * fam.gamma0());
    const double pzb =
        l2 * std::exp(-etabar * etabar * 0.5 * alpha2 * fam.gamma0());
    const double znew =
        pz * ((1.0 - s_j * row.m11) * z + zj * row.m12 * zbar);
    const double zbnew =
        pzb * ((1.0 - s_j * row.m22) * zbar + zj * row.m21 * z);
    z = znew;
    zbar = zbnew;
}

namespace {

// one log-domain step of the 2x2 flow with coefficients (m11,m22,m12,m21)
void step_log(LogSigned& z, LogSigned& zbar, double pref_z, double pref_zbar,
              double d11, double o12, double d22, double o21) {
    const LogSigned t1 = z.scaled(d11);
    const LogSigned t2 = zbar.scaled(o12);
    const LogSigned u1 = zbar.scaled(d22);
    const LogSigned u2 = z.scaled(o21);
    LogSigned zn = log_add(t1, t2);
    LogSigned zbn = log_add(u1, u2);
    if (zn.sign != 0) zn.log_abs += std::log(pref_z);
    if (zbn.sign != 0) zbn.log_abs += std::log(pref_zbar);
    z = zn;
    zbar = zbn;
}

}  // namespace

ChargeTrajectory run_charge_flow(const flow::CouplingTrajectory& coupling,
                                 const coeff::CoefficientTable& coeffs,
                                 const cov::CovarianceFamily& fam,
                                 double alpha2, double eta, int j_end) {
    if (!(eta > 0.0 && eta < 1.0))
        throw std::domain_error("run_charge_flow: eta in (0,1)");
    const bool mirrored = eta > 0.5;
    const double e = mirrored ? 1.0 - eta : eta;
    if (std::abs(coeffs.eta - e) > 1e-12 &&
        std::abs(coeffs.eta - (1.0 - e)) > 1e-12)
        throw std::invalid_argument(
            "run_charge_flow: coefficient table eta mismatch");
    const bool table_mirrored = std::abs(coeffs.eta - e) > 1e-12;
    if (j_end >= int(coupling.states.size()))
        throw std::out_of_range("run_charge_flow: coupling trajectory short");
    const double ebar = e - 1.0;
    const double l2 = double(fam.L()) * double(fam.L());
    const double pz = l2 * std::exp(-e * e * 0.5 * alpha2 * fam.gamma0());
    const double pzb =
        l2 * std::exp(-ebar * ebar * 0.5 * alpha2 * fam.gamma0());
    ChargeTrajectory traj;
    traj.eta = eta;
    traj.states.reserve(std::size_t(j_end) + 1);
    // physical initial data (Z, Zbar) = (1, 0); in the mirrored frame the
    // roles are swapped
    LogSigned z = mirrored ? LogSigned::zero() : LogSigned::one();
    LogSigned zbar = mirrored ? LogSigned::one() : LogSigned::zero();
    const auto push = [&](int j) {
        RenormState st;
        st.j = j;
        st.z = mirrored ? zbar : z;
        st.zbar = mirrored ? z : zbar;
        st.g = 0.0;
        traj.states.push_back(st);
    };
    push(0);
    for (int j = 0; j < j_end; ++j) {
        const coeff::Row& row = coeffs.at(j);
        const double m11 = table_mirrored ? row.m22 : row.m11;
        const double m22 = table_mirrored ? row.m11 : row.m22;
        const double m12 = table_mirrored ? row.m21 : row.m12;
        const double m21 = table_mirrored ? row.m12 : row.m21;
        const double s_j = coupling.states[std::size_t(j)].s;
        const double z_j = coupling.states[std::size_t(j)].z;
        step_log(z, zbar, pz, pzb, 1.0 - s_j * m11, z_j * m12,
                 1.0 - s_j * m22, z_j * m21);
        push(j + 1);
    }
    return traj;
}

JumpCosts jump_costs(int n, const JumpInputs& in) {
    const double eta = in.eta;
    if (!(eta > 0.0 && eta < 0.5))
        throw std::domain_error("jump_costs: eta in (0, 1/2)");
    const double ebar2 = (eta - 1.0) * (eta - 1.0);
    const double gap = ebar2 - eta * eta;
    const coeff::Row& row = in.coeffs->at(n);
    const double s_n = in.coupling->states.at(std::size_t(n)).s;
    const double z_n = in.coupling->states.at(std::size_t(n)).z;
    const double qn = n >= 1 ? std::abs(in.coupling->q(n))
                             : std::abs(in.coupling->q1);
    JumpCosts out;
    out.m_log = std::log(1.0 - row.m11 * s_n) + eta * eta * qn;
    const double decay = std::exp(-4.0 * kPi * gap * in.fam->gamma0() +
                                  eta * eta * qn - out.m_log);
    out.ell = decay * (1.0 - row.m22 * s_n);
    out.m_minus = std::exp(eta * eta * qn - out.m_log) * row.m12 * z_n;
    out.m_plus = decay * row.m21 * z_n;
    return out;
}

QMatrix q_matrix(int j, int j0, const JumpInputs& in) {
    if (j0 < 1 || j0 > j) throw std::domain_error("q_matrix: 1 <= j0 <= j");
    QMatrix out;
    out.j0 = j0;
    out.j = j;
    double q[2][2] = {{1, 0}, {0, 1}};
    for (int n = j0; n <= j; ++n) {
        const JumpCosts c = jump_costs(n, in);
        const double m[2][2] = {{1.0, c.m_minus}, {c.m_plus, c.ell}};
        double r[2][2];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                r[a][b] = m[a][0] * q[0][b] + m[a][1] * q[1][b];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) q[a][b] = r[a][b];
    }
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) out.q[a][b] = q[a][b];
    return out;
}

int adaptive_j0(const JumpInputs& in, int j_cap) {
    const double eta = in.eta;
    const double gap = (eta - 1.0) * (eta - 1.0) - eta * eta;
    const double bound = std::pow(double(in.fam->L()), -gap);
    for (int n = 1; n <= j_cap; ++n)
        if (jump_costs(n, in).ell <= bound) return n;
    return j_cap;
}

double c_eta(const cov::CovarianceFamily& fam, double alpha2, double eta,
             const latsum::Options& sum_opt, double series_tol) {
    if (!(eta > 0.0 && eta < 0.5))
        throw std::domain_error("c_eta: eta in (0, 1/2)");
    const double ebar = eta - 1.0;
    const double gap = ebar * ebar - eta * eta;
    const double g0 = fam.gamma0();
    double total = 0.0;
    double prev = 0.0;
    for (int n = 0; n < 400; ++n) {
        const double support =
            fam.rho_max() * std::pow(double(fam.L()), double(n));
        const auto f = [&](double r) {
            const double exc = fam.scale_sum_excess(n + 1, r);
            const double gn = fam.continuum_radial(n, r);
            return std::exp(-ebar * alpha2 * exc) *
                   std::exp(ebar * alpha2 * g0) *
                   std::expm1(-ebar * alpha2 * gn);
        };
        const double inner = latsum::radial_sum(
            f, support, std::pow(double(fam.L()), double(n)), 0, sum_opt);
        const double term =
            std::pow(double(fam.L()), -2.0 * double(n)) *
            std::exp(-4.0 * kPi * gap * double(n) * g0) * inner;
        total += term;
        if (n > 2 && std::abs(term) < series_tol * std::abs(total) &&
            std::abs(prev) < series_tol * std::abs(total))
            break;
        if (n > 4 && std::abs(term) > std::abs(prev) * 1.5)
            throw std::runtime_error("c_eta: series not converging");
        prev = term;
    }
    return total;
}

void ChargeTrajectory::write_csv(const std::string& path,
                                 const flow::CouplingTrajectory& coupling) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    out << "j,lnZ,lnZbar,lnZplus,lnZminus,q\n";
    char buf[200];
    for (std::size_t k = 0; k < states.size(); ++k) {
        const auto& st = states[k];
        const LogSigned zp = zplus(int(k));
        const LogSigned zm = zminus(int(k));
        const double qk = k >= 1 && k < coupling.states.size()
                              ? coupling.q(int(k))
                              : 0.0;
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      st.j, st.z.sign == 0 ? -1e308 : st.z.log_abs,
                      st.zbar.sign == 0 ? -1e308 : st.zbar.log_abs,
                      zp.sign == 0 ? -1e308 : zp.log_abs,
                      zm.sign == 0 ? -1e308 : zm.log_abs, qk);
        out << buf;
    }
}

}  // namespace bkt::charge
