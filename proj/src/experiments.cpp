#include "xdyn/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace xdyn {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

ExcitonNetwork network_from_config(const ExperimentConfig& cfg) {
    const double j12 =
        cfg.j12_cm > 0.0 ? units::cm_to_au(cfg.j12_cm) : canonical_j12();
    ExcitonNetwork net;
    net.epsilon = Eigen::Vector3d(0.0, 0.0, -j12);
    net.coupling = Eigen::Matrix3d::Zero();
    net.coupling(0, 1) = net.coupling(1, 0) = j12;
    net.coupling(1, 2) = net.coupling(2, 1) = j12 * cfg.j23_ratio;
    net.noise_site = cfg.noise_site - 1;
    return net;
}

SpectralDensity shape_from_config(const ExperimentConfig& cfg) {
    return cfg.shape == SpectralShape::broad ? SpectralDensity::broad()
                                             : SpectralDensity::thin();
}

}  // namespace

ResolvedModel resolve(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!cfg.eta && !cfg.p)
        throw ConfigError("config: one of bath.eta / bath.p is required");

    ResolvedModel m;
    m.net = network_from_config(cfg);
    m.h_s = build_hamiltonian(m.net);
    m.reference_temperature = cfg.temperature;
    const Eigen::MatrixXd s_op = noise_projector(m.net.n_sites(), m.net.noise_site);

    if (cfg.eta) {
        m.bath = set_eta(shape_from_config(cfg), *cfg.eta, m.net, cfg.temperature,
                         cfg.n_matsubara);
    } else {
        SpectralDensity sd = shape_from_config(cfg);
        sd.p = *cfg.p;
        m.bath = make_bath(sd, cfg.temperature, cfg.n_matsubara);
        // eta self-consistently from the shifted Hamiltonian
        const EigenSystem es = diagonalize(
            effective_hamiltonian(m.h_s, m.bath.lambda, m.net.noise_site), s_op);
        m.bath.eta = std::abs(m.bath.lambda) / es.gap_bright_dplus();
    }
    m.eta_label = m.bath.eta;

    if (cfg.classical) {
        const EigenSystem es_ref = diagonalize(
            effective_hamiltonian(m.h_s, m.bath.lambda, m.net.noise_site), s_op);
        m.bath = classical_limit(m.bath, cfg.t_high, es_ref.mean_bright_gap());
    }

    m.h_eff = effective_hamiltonian(m.h_s, m.bath.lambda, m.net.noise_site);
    m.es = diagonalize(m.h_eff, s_op);
    m.expansion = expand_correlation_auto(m.bath, 1e-4, 64,
                                          units::fs_to_au(cfg.t_end_fs));
    return m;
}

Eigen::MatrixXcd bright_state(const EigenSystem& es) {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(es.dim(), es.dim());
    rho(es.idx_bright(), es.idx_bright()) = 1.0;
    return rho;
}

TrajectoryRecord run_solver(const ResolvedModel& model, const ExperimentConfig& cfg,
                            const Eigen::MatrixXcd& rho0) {
    const auto t_grid = uniform_grid_au(units::fs_to_au(cfg.t_end_fs),
                                        units::fs_to_au(cfg.dt_out_fs));
    TrajectoryRecord traj;
    if (cfg.solver == "heom") {
        HeomOptions opts;
        opts.dt_au = units::fs_to_au(cfg.dt_fs);
        HeomPropagator prop(model.expansion, model.es.energies,
                            model.es.coupling_op, cfg.resolved_level(), opts);
        traj = prop.propagate(rho0, t_grid);
    } else {
        const RedfieldTensor rt =
            build_tensor(model.es, model.expansion, cfg.lamb_shift);
        const RedfieldMode mode = cfg.solver == "redfield-secular"
                                      ? RedfieldMode::secular
                                      : RedfieldMode::nonsecular;
        traj = propagate_redfield(rho0, rt, mode, t_grid);
    }
    traj.meta.eta = model.eta_label;
    traj.meta.temperature = model.bath.temperature;
    traj.meta.shape = to_string(model.bath.sd.shape);
    traj.meta.level = cfg.solver == "heom" ? cfg.resolved_level() : 0;
    return traj;
}

// ----------------------------- artifact writers -----------------------------

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& traj,
                          const EigenSystem& es) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "time_fs,pop_B,pop_D+,pop_D-,|rho_D+D-|,Re rho_D+D-,Im rho_D+D-,"
          "Re rho_BD+,Re rho_BD-,purity,site1,site2,site3\n";
    const int dm = es.idx_dminus(), dp = es.idx_dplus(), b = es.idx_bright();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const Eigen::MatrixXcd& rho = traj.states[i];
        const Eigen::MatrixXcd site = es.basis * rho * es.basis.transpose();
        os << fmt(units::au_to_fs(traj.times_au[i])) << ','
           << fmt(rho(b, b).real()) << ',' << fmt(rho(dp, dp).real()) << ','
           << fmt(rho(dm, dm).real()) << ',' << fmt(std::abs(rho(dp, dm))) << ','
           << fmt(rho(dp, dm).real()) << ',' << fmt(rho(dp, dm).imag()) << ','
           << fmt(rho(b, dp).real()) << ',' << fmt(rho(b, dm).real()) << ','
           << fmt((rho * rho).trace().real()) << ','
           << fmt(site(0, 0).real()) << ',' << fmt(site(1, 1).real()) << ','
           << fmt(site(2, 2).real()) << '\n';
    }
}

void write_volume_csv(const std::string& path, const BlochVolume& vol) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "time_fs,V_affine,V_full\n";
    for (std::size_t i = 0; i < vol.times_au.size(); ++i)
        os << fmt(units::au_to_fs(vol.times_au[i])) << ',' << fmt(vol.v_affine[i])
           << ',' << fmt(vol.v_full[i]) << '\n';
}

void write_meta(const std::string& path, const ResolvedModel& m,
                const ExperimentConfig& cfg) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    const double j12 = m.net.coupling(0, 1);
    os << "model.j12_au = " << fmt(j12) << "\n";
    os << "model.j12_cm = " << fmt(units::au_to_cm(j12)) << "\n";
    os << "model.j23_au = " << fmt(m.net.coupling(1, 2)) << "\n";
    os << "model.eps3_au = " << fmt(m.net.epsilon(2)) << "\n";
    os << "model.noise_site = " << (m.net.noise_site + 1) << "\n";
    os << "bath.shape = " << to_string(m.bath.sd.shape) << "\n";
    os << "bath.p = " << fmt(m.bath.sd.p) << "\n";
    os << "bath.omega1_au = " << fmt(m.bath.sd.omega[0]) << "\n";
    os << "bath.gamma1_au = " << fmt(m.bath.sd.gamma[0]) << "\n";
    os << "bath.omega2_au = " << fmt(m.bath.sd.omega[1]) << "\n";
    os << "bath.gamma2_au = " << fmt(m.bath.sd.gamma[1]) << "\n";
    os << "bath.lambda_au = " << fmt(m.bath.lambda) << "\n";
    os << "bath.lambda_cm = " << fmt(units::au_to_cm(m.bath.lambda)) << "\n";
    os << "bath.eta = " << fmt(m.bath.eta) << "\n";
    os << "bath.eta_label = " << fmt(m.eta_label) << "\n";
    os << "bath.temperature_K = " << fmt(m.bath.temperature) << "\n";
    os << "bath.reference_temperature_K = " << fmt(m.reference_temperature) << "\n";
    os << "bath.classical = " << (cfg.classical ? "true" : "false") << "\n";
    os << "bath.n_matsubara = " << m.bath.n_matsubara << "\n";
    for (int i = 0; i < m.es.dim(); ++i) {
        os << "eigen.E" << i << "_au = " << fmt(m.es.energies(i)) << "\n";
        os << "eigen.E" << i << "_cm = " << fmt(units::au_to_cm(m.es.energies(i)))
           << "\n";
    }
    os << "eigen.E_BD+_au = " << fmt(m.es.gap_bright_dplus()) << "\n";
    os << "eigen.E_BD+_cm = " << fmt(units::au_to_cm(m.es.gap_bright_dplus())) << "\n";
    os << "eigen.E_BD-_au = " << fmt(m.es.gap_bright_dminus()) << "\n";
    os << "eigen.E_BD-_cm = " << fmt(units::au_to_cm(m.es.gap_bright_dminus())) << "\n";
    os << "eigen.E_D+D-_au = " << fmt(m.es.gap_doublet()) << "\n";
    os << "eigen.E_D+D-_cm = " << fmt(units::au_to_cm(m.es.gap_doublet())) << "\n";
    os << "solver.method = " << cfg.solver << "\n";
    os << "solver.level = " << cfg.resolved_level() << "\n";
    os << "solver.dt_fs = " << fmt(cfg.dt_fs) << "\n";
    os << "solver.t_end_fs = " << fmt(cfg.t_end_fs) << "\n";
    os << "solver.dt_out_fs = " << fmt(cfg.dt_out_fs) << "\n";
    os << "solver.lamb_shift = " << (cfg.lamb_shift ? "true" : "false") << "\n";
    os << "output.bloch_volume = " << (cfg.bloch_volume ? "true" : "false") << "\n";
    os << "output.volume_t_end_fs = " << fmt(cfg.volume_t_end_fs) << "\n";
}

void write_plot_script(const std::string& path, bool with_volume) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "# gnuplot script: gnuplot -persist plot.gp\n"
          "set datafile separator ','\n"
          "set key autotitle columnhead\n"
          "set xlabel 'time (fs)'\n"
          "set terminal pngcairo size 1200,900\n"
          "set output 'populations.png'\n"
          "plot 'trajectory.csv' using 1:2 with lines title 'B', \\\n"
          "     '' using 1:3 with lines title 'D+', \\\n"
          "     '' using 1:4 with lines title 'D-'\n"
          "set output 'coherence.png'\n"
          "plot 'trajectory.csv' using 1:5 with lines title '|rho_D+D-|', \\\n"
          "     '' using 1:6 with lines title 'Re', \\\n"
          "     '' using 1:7 with lines title 'Im'\n"
          "set output 'purity.png'\n"
          "plot 'trajectory.csv' using 1:10 with lines title 'purity'\n"
          "set output 'sites.png'\n"
          "plot 'trajectory.csv' using 1:11 with lines title 'site 1', \\\n"
          "     '' using 1:12 with lines title 'site 2', \\\n"
          "     '' using 1:13 with lines title 'site 3'\n";
    if (with_volume)
        os << "set output 'volume.png'\n"
              "plot 'volume.csv' using 1:2 with lines title 'V(t)'\n";
}

// ------------------------------- entry points -------------------------------

int run_experiment(const ExperimentConfig& cfg) {
    ResolvedModel model;
    try {
        model = resolve(cfg);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return exit_config_error;
    }
    try {
        fs::create_directories(cfg.out_dir);
        const TrajectoryRecord traj = run_solver(model, cfg, bright_state(model.es));
        write_trajectory_csv(cfg.out_dir + "/trajectory.csv", traj, model.es);
        write_meta(cfg.out_dir + "/meta", model, cfg);
        if (cfg.bloch_volume) {
            const auto vol_grid = uniform_grid_au(units::fs_to_au(cfg.volume_t_end_fs),
                                                  units::fs_to_au(cfg.dt_out_fs));
            HeomOptions opts;
            opts.dt_au = units::fs_to_au(cfg.dt_fs);
            HeomPropagator prop(model.expansion, model.es.energies,
                                model.es.coupling_op, cfg.resolved_level(), opts);
            const BlochVolume vol = bloch_volume(
                [&](const Eigen::MatrixXcd& g) { return prop.propagate(g, vol_grid); },
                model.es.dim(), vol_grid);
            write_volume_csv(cfg.out_dir + "/volume.csv", vol);
        }
        write_plot_script(cfg.out_dir + "/plot.gp", cfg.bloch_volume);
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return exit_solver_failure;
    }
    return exit_ok;
}

int run_scan(const ExperimentConfig& cfg, const std::string& parameter,
             const std::vector<double>& values) {
    if (values.empty()) {
        std::cerr << "scan: empty value list\n";
        return exit_config_error;
    }
    if (parameter != "eta" && parameter != "L" && parameter != "temperature") {
        std::cerr << "scan: unknown parameter '" << parameter
                  << "' (expected eta, L or temperature)\n";
        return exit_config_error;
    }

    std::vector<ScanSummaryRow> rows;
    bool any_failed = false;
    for (const double value : values) {
        ExperimentConfig sub = cfg;
        std::ostringstream name;
        name << cfg.out_dir << "/" << parameter << "_" << fmt(value);
        sub.out_dir = name.str();
        if (parameter == "eta") sub.eta = value;
        else if (parameter == "L") sub.level = static_cast<int>(value);
        else sub.temperature = value;

        ScanSummaryRow row;
        row.value = value;
        try {
            const ResolvedModel model = resolve(sub);
            fs::create_directories(sub.out_dir);
            const TrajectoryRecord traj =
                run_solver(model, sub, bright_state(model.es));
            write_trajectory_csv(sub.out_dir + "/trajectory.csv", traj, model.es);
            write_meta(sub.out_dir + "/meta", model, sub);
            write_plot_script(sub.out_dir + "/plot.gp", false);

            const auto coh = coherence_modulus(traj, model.es.idx_dplus(),
                                               model.es.idx_dminus());
            const auto pur = purity(traj);
            std::size_t ipeak = 0;
            for (std::size_t i = 1; i < coh.size(); ++i)
                if (coh[i] > coh[ipeak]) ipeak = i;
            row.peak_coherence = coh[ipeak];
            row.t_peak_fs = units::au_to_fs(traj.times_au[ipeak]);
            row.half_life_fs = -1.0;
            for (std::size_t i = ipeak; i < coh.size(); ++i)
                if (coh[i] < 0.5 * coh[ipeak]) {
                    row.half_life_fs = units::au_to_fs(traj.times_au[i]);
                    break;
                }
            row.asymptotic_purity = pur.back();
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
            any_failed = true;
        }
        rows.push_back(row);
    }

    fs::create_directories(cfg.out_dir);
    std::ofstream os(cfg.out_dir + "/summary.csv");
    os << parameter
       << ",status,peak_coherence,t_peak_fs,half_life_fs,asymptotic_purity\n";
    for (const auto& r : rows) {
        os << fmt(r.value) << ',' << (r.ok ? "ok" : ("failed: " + r.error)) << ','
           << fmt(r.peak_coherence) << ',' << fmt(r.t_peak_fs) << ','
           << fmt(r.half_life_fs) << ',' << fmt(r.asymptotic_purity) << '\n';
    }
    return any_failed ? exit_solver_failure : exit_ok;
}

int run_rates(const ExperimentConfig& cfg, const std::vector<double>& etas) {
    if (etas.empty()) {
        std::cerr << "rates: empty eta list\n";
        return exit_config_error;
    }
    try {
        fs::create_directories(cfg.out_dir);
        std::ofstream os(cfg.out_dir + "/rates.csv");
        os << "eta,R_D+D+BB_au,R_D-D-BB_au,Re_R_D+D-BB_au,Im_R_D+D-BB_au,"
              "R_BBD+D+_au,R_BBD-D-_au,"
              "R_D+D+BB_ps,R_D-D-BB_ps,abs_R_D+D-BB_ps\n";
        const double au_to_ps = 1.0 / (units::fs_per_au * 1e-3);
        for (const double eta : etas) {
            ExperimentConfig sub = cfg;
            sub.eta = eta;
            sub.p.reset();
            const ResolvedModel model = resolve(sub);
            // tabulated elements are the golden-rule (delta-function) parts;
            // principal-value terms enter only the propagator
            const RedfieldTensor rt =
                build_tensor(model.es, model.expansion, false);
            const RateElements e = rate_elements(rt);
            os << fmt(eta) << ',' << fmt(e.down_pp) << ',' << fmt(e.down_mm) << ','
               << fmt(e.down_pm.real()) << ',' << fmt(e.down_pm.imag()) << ','
               << fmt(e.up_pp) << ',' << fmt(e.up_mm) << ','
               << fmt(e.down_pp * au_to_ps) << ',' << fmt(e.down_mm * au_to_ps)
               << ',' << fmt(std::abs(e.down_pm) * au_to_ps) << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        std::cerr << "rates failure: " << e.what() << "\n";
        return exit_solver_failure;
    }
    return exit_ok;
}

int run_validate_expansion(const ExperimentConfig& cfg) {
    try {
        ExperimentConfig sub = cfg;
        if (!sub.eta && !sub.p) sub.eta = 0.01;
        const ResolvedModel model = resolve(sub);
        fs::create_directories(cfg.out_dir);
        std::ofstream table(cfg.out_dir + "/expansion.txt");
        write_expansion_table(table, model.expansion);
        const double err = expansion_error(model.expansion, model.bath,
                                           units::fs_to_au(cfg.t_end_fs));
        std::cout << "expansion terms: " << model.expansion.size() << " ("
                  << model.expansion.n_poles << " poles + "
                  << model.expansion.n_matsubara() << " Matsubara)\n";
        std::cout << "sup-norm error vs quadrature on [0, " << cfg.t_end_fs
                  << " fs]: " << err << "\n";
        return err < 1e-4 ? exit_ok : exit_validation_failure;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        std::cerr << "validation failure: " << e.what() << "\n";
        return exit_validation_failure;
    }
}

FigurePlan figure_preset(const std::string& name) {
    FigurePlan plan;
    ExperimentConfig& c = plan.cfg;
    c.out_dir = name;
    if (name == "fig3") {
        plan.kind = FigurePlan::Kind::rates;
        for (int i = 0; i <= 24; ++i)
            plan.values.push_back(1e-4 * std::pow(2e3, i / 24.0));  // 1e-4 .. 0.2
    } else if (name == "fig4" || name == "fig5" || name == "fig6") {
        plan.kind = FigurePlan::Kind::scan_eta;
        plan.values = {1e-4, 1e-3, 0.01, 0.04, 0.16};
    } else if (name == "fig7") {
        plan.kind = FigurePlan::Kind::single;
        c.eta = 0.01;
    } else if (name == "fig8") {
        plan.kind = FigurePlan::Kind::compare_shapes;
        c.eta = 0.01;
    } else if (name == "fig9" || name == "fig10") {
        plan.kind = FigurePlan::Kind::scan_eta;
        c.classical = true;
        plan.values = {1e-2, 1e-3, 1e-4};
    } else if (name == "fig11") {
        plan.kind = FigurePlan::Kind::single;
        c.eta = 0.16;
        c.bloch_volume = true;
    } else if (name == "fig12") {
        plan.kind = FigurePlan::Kind::scan_level;
        c.eta = 0.16;
        c.t_end_fs = 1000.0;
        plan.values = {1, 2, 3, 4, 5};
    } else if (name == "fig13") {
        plan.kind = FigurePlan::Kind::compare_solvers;
        c.eta = 0.01;
    } else {
        throw ConfigError("unknown experiment '" + name + "' (expected fig3..fig13)");
    }
    return plan;
}

int execute_plan(const FigurePlan& plan) {
    switch (plan.kind) {
        case FigurePlan::Kind::single:
            return run_experiment(plan.cfg);
        case FigurePlan::Kind::scan_eta:
            return run_scan(plan.cfg, "eta", plan.values);
        case FigurePlan::Kind::scan_level:
            return run_scan(plan.cfg, "L", plan.values);
        case FigurePlan::Kind::rates:
            return run_rates(plan.cfg, plan.values);
        case FigurePlan::Kind::compare_shapes: {
            for (const SpectralShape s : {SpectralShape::thin, SpectralShape::broad}) {
                ExperimentConfig sub = plan.cfg;
                sub.shape = s;
                sub.out_dir = plan.cfg.out_dir + "/" + to_string(s);
                if (const int rc = run_experiment(sub); rc != exit_ok) return rc;
            }
            return exit_ok;
        }
        case FigurePlan::Kind::compare_solvers: {
            for (const char* solver : {"heom", "redfield-nonsecular"}) {
                ExperimentConfig sub = plan.cfg;
                sub.solver = solver;
                sub.out_dir = plan.cfg.out_dir + "/" + solver;
                if (const int rc = run_experiment(sub); rc != exit_ok) return rc;
            }
            return exit_ok;
        }
    }
    return exit_config_error;
}

}  // namespace xdyn
