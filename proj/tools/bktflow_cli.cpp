// bktflow command-line front end: potentials, covariance kernels, flow
// coefficients, separatrix location, charge flows, correlation profiles,
// phase-diagram orbits, oracle runs, and the verification suite.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bktflow/acceptance.hpp"
#include "bktflow/charge_flow.hpp"
#include "bktflow/correlation.hpp"
#include "bktflow/covariance.hpp"
#include "bktflow/io.hpp"
#include "bktflow/lattice_green.hpp"
#include "bktflow/oracle.hpp"
#include "bktflow/rg_coefficients.hpp"
#include "bktflow/rg_flow.hpp"
#include "bktflow/simd.hpp"

namespace {

namespace fs = std::filesystem;

bkt::cov::CutoffFunction cutoff_by_label(const std::string& label) {
    if (label == "gauss") return bkt::cov::CutoffFunction::gaussian();
    if (label == "quartic") return bkt::cov::CutoffFunction::quartic();
    throw std::invalid_argument("unknown cutoff label: " + label);
}

std::string out_path(const bkt::io::RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.outdir);
    return cfg.outdir + "/" + name;
}

void emit_error_json(const std::exception& e) {
    nlohmann::json j;
    j["error"] = e.what();
    std::cerr << j.dump() << "\n";
}

struct Workspace {
    bkt::io::RunConfig cfg;

    bkt::cov::CovarianceFamily family() const {
        return bkt::cov::CovarianceFamily(cfg.L, std::max(cfg.j_max, 2),
                                          cutoff_by_label(cfg.cutoff),
                                          cfg.tol, "cache");
    }
    bkt::coeff::CoefficientTable coefficients(
        const bkt::cov::CovarianceFamily& fam) const {
        bkt::coeff::Options co;
        co.alpha2 = cfg.alpha2;
        co.eta = cfg.eta;
        co.j_max = cfg.j_max;
        co.j_freeze = cfg.j_freeze;
        return bkt::coeff::build_coefficient_table(fam, co);
    }
};

int cmd_potential(const Workspace& ws, std::int64_t side, double mass,
                  std::int64_t dump_radius) {
    const auto spec = side > 0
                          ? bkt::green::LatticeSpec::from_side(side)
                          : bkt::green::LatticeSpec::from_blocks(ws.cfg.L,
                                                                ws.cfg.R);
    const auto table = mass > 0.0 ? bkt::green::yukawa_potential(spec, mass)
                                  : bkt::green::coulomb_potential(spec);
    const auto meta = bkt::io::metadata_lines(ws.cfg, "potential");
    bkt::green::write_csv(table, out_path(ws.cfg, "potential.csv"), meta,
                          dump_radius);
    if (mass == 0.0) {
        const auto fit = bkt::green::fit_c_e(table);
        nlohmann::json j;
        j["W_1_0"] = table.at(1, 0);
        j["c_e_fit"] = fit.c_e;
        j["c_e_closed_form"] = bkt::green::euler_constant();
        j["fit_max_abs_dev"] = fit.max_abs_dev;
        j["side"] = spec.side;
        std::ofstream out(out_path(ws.cfg, "potential.json"));
        out << j.dump(2) << "\n";
        std::cout << j.dump() << "\n";
    }
    return 0;
}

int cmd_covariance(const Workspace& ws, std::int64_t dump_radius) {
    const auto fam = ws.family();
    fam.dump_csv(out_path(ws.cfg, "covariance.csv"), 0,
                 std::min(ws.cfg.j_max, 2), dump_radius);
    nlohmann::json j;
    j["L"] = fam.L();
    j["cutoff"] = fam.cutoff_label();
    j["gamma0"] = fam.gamma0();
    j["c_tilde_e"] = fam.c_tilde_e();
    j["rho_max"] = fam.rho_max();
    j["max_beyond_range"] = fam.max_beyond_range();
    std::ofstream out(out_path(ws.cfg, "covariance.json"));
    out << j.dump(2) << "\n";
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_coeffs(const Workspace& ws) {
    const auto fam = ws.family();
    const auto table = ws.coefficients(fam);
    table.write_csv(out_path(ws.cfg, "coeffs.csv"));
    const auto lim = bkt::coeff::compute_asymptotic_continuum(
        fam, ws.cfg.alpha2, ws.cfg.eta);
    nlohmann::json j;
    j["a_limit"] = lim.a_limit;
    j["b_limit"] = lim.b_limit;
    j["m21_limit"] = lim.m21_limit;
    j["a_tail"] = table.a_inf();
    j["b_tail"] = table.b_inf();
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_separatrix(const Workspace& ws, const std::string& golden_path,
                   bool bless) {
    const auto fam = ws.family();
    const auto table = ws.coefficients(fam);
    bkt::flow::ShootOptions so;
    so.j_max = std::max(240, ws.cfg.j_max);
    const auto shot = bkt::flow::shoot_separatrix(ws.cfg.z, table, fam,
                                                  ws.cfg.alpha2, so);
    nlohmann::json j;
    j["z"] = ws.cfg.z;
    j["s_of_z"] = shot.s_of_z;
    j["beta_bkt"] = bkt::flow::beta_bkt(shot.s_of_z, ws.cfg.alpha2);
    j["iterations"] = shot.iterations;
    j["bracket_width"] = shot.bracket_width;
    shot.trajectory.write_csv(out_path(ws.cfg, "separatrix_flow.csv"));
    std::ofstream out(out_path(ws.cfg, "separatrix.json"));
    out << j.dump(2) << "\n";
    std::cout << j.dump() << "\n";
    if (!golden_path.empty()) {
        auto reg = bkt::io::GoldenRegistry::load(golden_path);
        char key[96];
        std::snprintf(key, sizeof key, "separatrix/s_of_z@%016llx",
                      static_cast<unsigned long long>(ws.cfg.hash()));
        if (bless) {
            reg.bless(key, shot.s_of_z);
            reg.save();
        } else if (auto v = reg.lookup(key)) {
            const double dev = std::abs(shot.s_of_z - *v);
            if (dev > 1e-12 * std::max(1.0, std::abs(*v))) {
                std::cerr << "golden mismatch for " << key << ": got "
                          << shot.s_of_z << " want " << *v << "\n";
                return 1;
            }
        }
    }
    return 0;
}

int cmd_flow(const Workspace& ws, double s0) {
    const auto fam = ws.family();
    const auto table = ws.coefficients(fam);
    const auto traj = bkt::flow::run_flow(s0, ws.cfg.z, table, fam,
                                          ws.cfg.alpha2,
                                          std::max(ws.cfg.j_max, 60));
    traj.write_csv(out_path(ws.cfg, "flow.csv"));
    nlohmann::json j;
    j["p"] = bkt::flow::free_energy(
        traj, bkt::flow::beta_bkt(s0, ws.cfg.alpha2));
    j["q1"] = traj.q1;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_charge_flow(const Workspace& ws, int jmax) {
    const auto fam = ws.family();
    const auto table = ws.coefficients(fam);
    bkt::flow::ShootOptions so;
    so.j_max = jmax + 20;
    const auto shot = bkt::flow::shoot_separatrix(ws.cfg.z, table, fam,
                                                  ws.cfg.alpha2, so);
    const auto ctraj = bkt::charge::run_charge_flow(
        shot.trajectory, table, fam, ws.cfg.alpha2, ws.cfg.eta, jmax);
    ctraj.write_csv(out_path(ws.cfg, "charge_flow.csv"), shot.trajectory);
    bkt::charge::JumpInputs in{&shot.trajectory, &table, &fam,
                               ws.cfg.alpha2, ws.cfg.eta};
    nlohmann::json j;
    j["eta"] = ws.cfg.eta;
    j["s_of_z"] = shot.s_of_z;
    if (ws.cfg.eta < 0.5) {
        j["j0_adaptive"] = bkt::charge::adaptive_j0(in, jmax);
        bkt::latsum::Options lo;
        j["c_eta"] = bkt::charge::c_eta(fam, ws.cfg.alpha2, ws.cfg.eta, lo);
    }
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_correlation(const Workspace& ws, int k_lo, int k_hi) {
    const auto fam = ws.family();
    const auto table = ws.coefficients(fam);
    bkt::flow::ShootOptions so;
    so.j_max = 260;
    const auto shot = bkt::flow::shoot_separatrix(ws.cfg.z, table, fam,
                                                  ws.cfg.alpha2, so);
    const auto ctraj = bkt::charge::run_charge_flow(
        shot.trajectory, table, fam, ws.cfg.alpha2, ws.cfg.eta, 250);
    bkt::corr::AsymptoticConstants consts;
    consts.additive_const = fam.c_tilde_e();
    consts.gamma0 = fam.gamma0();
    consts.L = double(fam.L());
    if (ws.cfg.eta < 0.5) {
        bkt::latsum::Options lo;
        consts.c_eta =
            bkt::charge::c_eta(fam, ws.cfg.alpha2, ws.cfg.eta, lo);
    }
    bkt::corr::CorrelationProfile prof;
    prof.eta = ws.cfg.eta;
    prof.z = ws.cfg.z;
    prof.L = fam.L();
    prof.source = "series";
    for (int k = k_lo; k <= k_hi; ++k) {
        const double x =
            std::round(std::pow(double(fam.L()), 0.5 * double(k)));
        prof.points.push_back(
            {x, bkt::corr::rho_eta(x, ctraj, fam, ws.cfg.alpha2, ws.cfg.eta),
             "total"});
        const auto av =
            bkt::corr::asymptotic_formula(x, ws.cfg.z, ws.cfg.eta, consts);
        prof.points.push_back({x, av.branch_a, "asympt_a"});
        if (ws.cfg.eta != 0.5)
            prof.points.push_back({x, av.branch_b, "asympt_b"});
    }
    prof.write_csv(out_path(ws.cfg, "correlation.csv"));
    // fit on the series points only
    bkt::corr::CorrelationProfile series = prof;
    series.points.clear();
    for (const auto& p : prof.points)
        if (p.branch == "total") series.points.push_back(p);
    const double f = bkt::corr::log_correction_f(consts, ws.cfg.z);
    const auto fit =
        bkt::corr::fit_exponents(series, bkt::corr::FitModel::power_log, f);
    std::ofstream out(out_path(ws.cfg, "correlation_fit.json"));
    out << bkt::corr::fit_to_json(fit) << "\n";
    std::cout << bkt::corr::fit_to_json(fit) << "\n";
    return 0;
}

int cmd_phase_diagram(const Workspace& ws, int grid) {
    // Kosterlitz ODE orbits for a grid of initial data
    fs::create_directories(ws.cfg.outdir);
    for (int i = 0; i < grid; ++i) {
        const double s0 = -0.05 + 0.15 * double(i) / double(grid - 1);
        const double z0 = 0.02;
        const auto orbit = bkt::flow::kosterlitz_integrate(s0, z0, 20.0, 1e-3);
        char name[64];
        std::snprintf(name, sizeof name, "orbit_%02d.csv", i);
        bkt::flow::write_ode_csv(orbit, out_path(ws.cfg, name));
    }
    std::cout << "{\"orbits\": " << grid << "}\n";
    return 0;
}

int cmd_oracle(const Workspace& ws, std::int64_t side, double beta, double m,
               std::uint64_t samples) {
    const auto spec = bkt::green::LatticeSpec::from_side(side);
    const auto mc = bkt::oracle::sine_gordon_mc(spec, beta, m, ws.cfg.z,
                                                samples, ws.cfg.seed);
    const auto wick = bkt::oracle::wick_series(spec, beta, m, ws.cfg.z, 4);
    nlohmann::json j;
    j["mc"] = nlohmann::json::parse(mc.to_json("sine-gordon"));
    j["wick_value"] = wick.value;
    j["wick_terms"] = wick.order_terms;
    std::ofstream out(out_path(ws.cfg, "oracle.json"));
    out << j.dump(2) << "\n";
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_verify_all(const Workspace& ws, bool quick) {
    bkt::acceptance::Options opt;
    opt.quick = quick;
    const auto results = bkt::acceptance::run_all(opt);
    bkt::acceptance::print_results(results);
    std::ofstream out(out_path(ws.cfg, "verify_all.json"));
    out << bkt::acceptance::to_json(results) << "\n";
    return bkt::acceptance::all_pass(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bktflow: multiscale RG toolkit for the 2D Coulomb gas"};
    app.require_subcommand(0, 1);

    bkt::io::RunConfig cfg;
    std::string config_file;
    app.add_option("--config", config_file, "flat key=value config file");
    app.add_option("--L", cfg.L, "block base");
    app.add_option("--R", cfg.R, "number of scales (torus side = L^R)");
    app.add_option("--alpha2", cfg.alpha2, "coupling alpha^2");
    app.add_option("--eta", cfg.eta, "probe charge in (0,1)");
    app.add_option("--z", cfg.z, "activity");
    app.add_option("--jmax", cfg.j_max, "largest built scale");
    app.add_option("--jfreeze", cfg.j_freeze, "coefficient freeze scale");
    app.add_option("--tol", cfg.tol, "truncation tolerance");
    app.add_option("--cutoff", cfg.cutoff, "cutoff label (gauss|quartic)");
    app.add_option("--seed", cfg.seed, "RNG seed");
    app.add_option("--out", cfg.outdir, "output directory");
    app.add_option("--threads", cfg.threads, "worker threads");

    std::int64_t side = 0, dump_radius = 32;
    double mass = 0.0, beta = 2.0, oracle_m = 0.1;
    double s0 = 0.0;
    std::uint64_t samples = 100000;
    int jmax_charge = 200, k_lo = 6, k_hi = 14, grid = 9;
    bool bless = false, quick = false;
    std::string golden = "data/golden.json";

    auto* c_pot = app.add_subcommand("potential", "torus potential tables");
    c_pot->add_option("--side", side, "explicit torus side (0: use L^R)");
    c_pot->add_option("--mass", mass, "Yukawa mass (0: Coulomb)");
    c_pot->add_option("--dump-radius", dump_radius, "CSV dump radius");

    auto* c_cov = app.add_subcommand("covariance", "covariance family");
    c_cov->add_option("--dump-radius", dump_radius, "CSV dump radius");

    app.add_subcommand("coeffs", "flow coefficient table");

    auto* c_sep = app.add_subcommand("separatrix", "locate s(z) by shooting");
    c_sep->add_option("--golden", golden, "golden registry path");
    c_sep->add_flag("--bless", bless, "update the golden registry");

    auto* c_flow = app.add_subcommand("flow", "run a coupling flow");
    c_flow->add_option("--s0", s0, "initial stiffness deviation");

    auto* c_charge = app.add_subcommand("charge-flow",
                                        "fractional-charge flow");
    c_charge->add_option("--jmax-charge", jmax_charge, "flow length");

    auto* c_corr = app.add_subcommand("correlation", "correlation profile");
    c_corr->add_option("--k-lo", k_lo, "lowest half-power of L");
    c_corr->add_option("--k-hi", k_hi, "highest half-power of L");

    auto* c_phase = app.add_subcommand("phase-diagram", "ODE orbit grid");
    c_phase->add_option("--grid", grid, "number of orbits");

    auto* c_orc = app.add_subcommand("oracle", "sine-Gordon MC vs Wick");
    c_orc->add_option("--side", side, "torus side")->default_val(5);
    c_orc->add_option("--beta", beta, "inverse temperature");
    c_orc->add_option("--mass", oracle_m, "regulator mass");
    c_orc->add_option("--samples", samples, "MC samples");

    auto* c_ver = app.add_subcommand("verify-all", "acceptance suite");
    c_ver->add_flag("--quick", quick, "reduced sample counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (app.get_subcommands().empty()) {
        std::cout << app.help() << "\n";
        return 2;
    }

    try {
        if (!config_file.empty()) {
            auto file_cfg = bkt::io::RunConfig::from_file(config_file);
            // CLI flags override file values where explicitly given
            for (const auto* o :
                 {"--L", "--R", "--alpha2", "--eta", "--z", "--jmax",
                  "--jfreeze", "--tol", "--cutoff", "--seed", "--out",
                  "--threads"})
                if (app.count(o) == 0) {
                    // keep file value
                } else {
                    continue;
                }
            // simplest merge: start from file, reapply explicit CLI flags
            if (app.count("--L")) file_cfg.L = cfg.L;
            if (app.count("--R")) file_cfg.R = cfg.R;
            if (app.count("--alpha2")) file_cfg.alpha2 = cfg.alpha2;
            if (app.count("--eta")) file_cfg.eta = cfg.eta;
            if (app.count("--z")) file_cfg.z = cfg.z;
            if (app.count("--jmax")) file_cfg.j_max = cfg.j_max;
            if (app.count("--jfreeze")) file_cfg.j_freeze = cfg.j_freeze;
            if (app.count("--tol")) file_cfg.tol = cfg.tol;
            if (app.count("--cutoff")) file_cfg.cutoff = cfg.cutoff;
            if (app.count("--seed")) file_cfg.seed = cfg.seed;
            if (app.count("--out")) file_cfg.outdir = cfg.outdir;
            if (app.count("--threads")) file_cfg.threads = cfg.threads;
            cfg = file_cfg;
        }
        cfg.validate();
        Workspace ws{cfg};
        if (c_pot->parsed()) return cmd_potential(ws, side, mass, dump_radius);
        if (c_cov->parsed()) return cmd_covariance(ws, dump_radius);
        if (app.get_subcommand_ptr("coeffs")->parsed()) return cmd_coeffs(ws);
        if (c_sep->parsed()) return cmd_separatrix(ws, golden, bless);
        if (c_flow->parsed()) return cmd_flow(ws, s0);
        if (c_charge->parsed()) return cmd_charge_flow(ws, jmax_charge);
        if (c_corr->parsed()) return cmd_correlation(ws, k_lo, k_hi);
        if (c_phase->parsed()) return cmd_phase_diagram(ws, grid);
        if (c_orc->parsed()) return cmd_oracle(ws, side, beta, oracle_m,
                                               samples);
        if (c_ver->parsed()) return cmd_verify_all(ws, quick);
        std::cout << app.help() << "\n";
        return 2;
    } catch (const std::exception& e) {
        emit_error_json(e);
        return 1;
    }
}
