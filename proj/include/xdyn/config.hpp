// config.hpp — experiment configuration: structured key/value text file
// with dotted section keys, mirrored one-to-one by CLI overrides.

#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "xdyn/bath.hpp"

namespace xdyn {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    // model block
    double j12_cm = 0.0;   // 0 = auto: J12 matched to the thin peak (~500 cm^-1)
    double j23_ratio = 0.1;
    int noise_site = 2;    // 1-based site index

    // bath block
    SpectralShape shape = SpectralShape::thin;
    std::optional<double> eta;
    std::optional<double> p;
    double temperature = 298.0;  // K; reference temperature for classical runs
    int n_matsubara = 10;
    bool classical = false;
    double t_high = 1e4;  // K, classical simulation temperature

    // solver block
    std::string solver = "heom";  // heom | redfield-secular | redfield-nonsecular
    int level = 0;                // HEOM truncation; 0 = auto from eta
    double dt_fs = 0.1;
    double t_end_fs = 2000.0;
    double dt_out_fs = 1.0;
    bool lamb_shift = true;

    // outputs block
    std::string out_dir = "out";
    bool bloch_volume = false;
    double volume_t_end_fs = 500.0;

    void validate() const {
        if (eta && p)
            throw ConfigError("config: give exactly one of bath.eta / bath.p, not both");
        if (eta && *eta <= 0.0) throw ConfigError("config: bath.eta must be > 0");
        if (t_end_fs <= 0.0) throw ConfigError("config: solver.t_end_fs must be > 0");
        if (dt_fs <= 0.0) throw ConfigError("config: solver.dt_fs must be > 0");
        if (dt_out_fs < dt_fs)
            throw ConfigError("config: solver.dt_out_fs must be >= solver.dt_fs");
        if (n_matsubara < 1) throw ConfigError("config: bath.n_matsubara must be >= 1");
        if (noise_site < 1 || noise_site > 3)
            throw ConfigError("config: model.noise_site must be in [1,3]");
        if (solver != "heom" && solver != "redfield-secular" &&
            solver != "redfield-nonsecular")
            throw ConfigError("config: unknown solver '" + solver + "'");
        if (level < 0) throw ConfigError("config: solver.level must be >= 0");
    }

    // effective HEOM level; eta <= 0.02 is the perturbative regime
    int resolved_level() const {
        if (level > 0) return level;
        const double e = eta.value_or(0.01);
        if (e <= 0.02) return 2;
        if (e <= 0.08) return 3;
        return 4;
    }
};

// Applies "section.key=value". Throws ConfigError on unknown keys or
// malformed values.
void apply_setting(ExperimentConfig& cfg, const std::string& key,
                   const std::string& value);

// Parses a config file of "key = value" lines ('#' comments allowed);
// error messages carry the line number.
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace xdyn
