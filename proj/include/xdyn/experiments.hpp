// experiments.hpp — experiment runner: resolve a config into a concrete
// model + bath + expansion, run the chosen solver, and write the CSV /
// meta / plot artifacts. Figure-named presets bundle the parameter sets
// behind the standard result figures.

#pragma once

#include <string>
#include <vector>

#include "xdyn/config.hpp"
#include "xdyn/heom.hpp"
#include "xdyn/model.hpp"
#include "xdyn/observables.hpp"
#include "xdyn/redfield.hpp"
#include "xdyn/trajectory.hpp"

namespace xdyn {

// exit codes shared by the CLI
inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 1;
inline constexpr int exit_solver_failure = 2;
inline constexpr int exit_validation_failure = 3;

struct ResolvedModel {
    ExcitonNetwork net;
    Eigen::MatrixXd h_s;
    Eigen::MatrixXd h_eff;
    EigenSystem es;
    BathSpec bath;                  // final bath (classical-rescaled when asked)
    CorrelationExpansion expansion;
    double eta_label = 0.0;         // requested eta (pre-rescale for classical)
    double reference_temperature = 298.0;
};

ResolvedModel resolve(const ExperimentConfig& cfg);

// initial state |B><B| in the eigenbasis
Eigen::MatrixXcd bright_state(const EigenSystem& es);

TrajectoryRecord run_solver(const ResolvedModel& model, const ExperimentConfig& cfg,
                            const Eigen::MatrixXcd& rho0);

// ----------------------------- artifact writers -----------------------------

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& traj,
                          const EigenSystem& es);
void write_volume_csv(const std::string& path, const BlochVolume& vol);
void write_meta(const std::string& path, const ResolvedModel& model,
                const ExperimentConfig& cfg);
void write_plot_script(const std::string& path, bool with_volume);

struct ScanSummaryRow {
    double value = 0.0;
    bool ok = false;
    std::string error;
    double peak_coherence = 0.0;
    double t_peak_fs = 0.0;
    double half_life_fs = -1.0;   // -1: never dropped below half the peak
    double asymptotic_purity = 0.0;
};

// ------------------------------- entry points -------------------------------

int run_experiment(const ExperimentConfig& cfg);
int run_scan(const ExperimentConfig& cfg, const std::string& parameter,
             const std::vector<double>& values);
int run_rates(const ExperimentConfig& cfg, const std::vector<double>& etas);
int run_validate_expansion(const ExperimentConfig& cfg);

// figure presets (fig3 .. fig13); throws ConfigError for unknown names
struct FigurePlan {
    enum class Kind { single, scan_eta, scan_level, compare_shapes,
                      compare_solvers, rates };
    Kind kind = Kind::single;
    ExperimentConfig cfg;
    std::vector<double> values;
};

FigurePlan figure_preset(const std::string& name);
int execute_plan(const FigurePlan& plan);

}  // namespace xdyn
