// xdyn command-line runner: experiments, parameter scans, rate tables and
// bath-expansion validation.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "xdyn/experiments.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir;
    double eta = -1.0;
    double p = -1.0;
    double temperature = -1.0;
    std::string shape;
    std::string solver;
    int level = -1;
    double t_end_fs = -1.0;
    double dt_fs = -1.0;
    int classical = -1;
};

void add_common(CLI::App* app, CommonArgs& a) {
    app->add_option("--config", a.config_path, "config file (key = value lines)");
    app->add_option("--set", a.sets, "override: section.key=value (repeatable)");
    app->add_option("--out", a.out_dir, "output directory");
    app->add_option("--eta", a.eta, "coupling ratio eta");
    app->add_option("--p", a.p, "spectral density amplitude p (a.u.)");
    app->add_option("--temperature", a.temperature, "bath temperature (K)");
    app->add_option("--shape", a.shape, "spectral density shape: thin | broad");
    app->add_option("--solver", a.solver,
                    "heom | redfield-secular | redfield-nonsecular");
    app->add_option("--level", a.level, "HEOM truncation level L");
    app->add_option("--t-end", a.t_end_fs, "propagation window (fs)");
    app->add_option("--dt", a.dt_fs, "integrator step (fs)");
    app->add_flag("--classical,!--quantum", a.classical,
                  "classical (high-temperature rescaled) noise");
}

int apply_common(xdyn::ExperimentConfig& cfg, const CommonArgs& a) {
    try {
        if (!a.config_path.empty()) cfg = xdyn::parse_config_file(a.config_path);
        for (const auto& kv : a.sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw xdyn::ConfigError("--set expects section.key=value, got " + kv);
            xdyn::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
        if (a.eta >= 0.0) { cfg.eta = a.eta; cfg.p.reset(); }
        if (a.p >= 0.0) { cfg.p = a.p; cfg.eta.reset(); }
        if (a.temperature >= 0.0) cfg.temperature = a.temperature;
        if (!a.shape.empty()) xdyn::apply_setting(cfg, "bath.shape", a.shape);
        if (!a.solver.empty()) cfg.solver = a.solver;
        if (a.level >= 0) cfg.level = a.level;
        if (a.t_end_fs > 0.0) cfg.t_end_fs = a.t_end_fs;
        if (a.dt_fs > 0.0) cfg.dt_fs = a.dt_fs;
        if (a.classical >= 0) cfg.classical = a.classical > 0;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return xdyn::exit_config_error;
    }
    return xdyn::exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dissipative exciton-network dynamics (Redfield / HEOM)"};
    app.require_subcommand(1);

    CommonArgs run_args, scan_args, rates_args, val_args;
    std::string experiment;
    std::string scan_parameter = "eta";
    std::vector<double> scan_values, eta_values, levels;

    CLI::App* run = app.add_subcommand("run", "run one experiment");
    add_common(run, run_args);
    run->add_option("--experiment", experiment, "figure preset: fig3 .. fig13");
    run->add_option("--levels", levels, "level list for fig12-style scans");

    CLI::App* scan = app.add_subcommand("scan", "scan eta, L or temperature");
    add_common(scan, scan_args);
    scan->add_option("--parameter", scan_parameter, "eta | L | temperature");
    scan->add_option("--values", scan_values, "scan values")->required();

    CLI::App* rates = app.add_subcommand("rates", "Redfield rate table vs eta");
    add_common(rates, rates_args);
    rates->add_option("--etas", eta_values, "eta values for the table");

    CLI::App* val = app.add_subcommand("validate-expansion",
                                       "correlation expansion vs quadrature oracle");
    add_common(val, val_args);

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (!experiment.empty()) {
            xdyn::FigurePlan plan;
            try {
                plan = xdyn::figure_preset(experiment);
            } catch (const std::exception& e) {
                std::cerr << e.what() << "\n";
                return xdyn::exit_config_error;
            }
            if (const int rc = apply_common(plan.cfg, run_args); rc != 0) return rc;
            if (!levels.empty() &&
                plan.kind == xdyn::FigurePlan::Kind::scan_level)
                plan.values = levels;
            if (run_args.eta >= 0.0 &&
                plan.kind == xdyn::FigurePlan::Kind::scan_eta)
                plan.values = {run_args.eta};
            return xdyn::execute_plan(plan);
        }
        xdyn::ExperimentConfig cfg;
        if (const int rc = apply_common(cfg, run_args); rc != 0) return rc;
        return xdyn::run_experiment(cfg);
    }
    if (scan->parsed()) {
        xdyn::ExperimentConfig cfg;
        if (const int rc = apply_common(cfg, scan_args); rc != 0) return rc;
        return xdyn::run_scan(cfg, scan_parameter, scan_values);
    }
    if (rates->parsed()) {
        xdyn::ExperimentConfig cfg;
        if (const int rc = apply_common(cfg, rates_args); rc != 0) return rc;
        if (eta_values.empty())
            eta_values = xdyn::figure_preset("fig3").values;
        return xdyn::run_rates(cfg, eta_values);
    }
    if (val->parsed()) {
        xdyn::ExperimentConfig cfg;
        if (const int rc = apply_common(cfg, val_args); rc != 0) return rc;
        return xdyn::run_validate_expansion(cfg);
    }
    return xdyn::exit_config_error;
}
