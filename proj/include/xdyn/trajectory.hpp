// trajectory.hpp — time series of density matrices plus run metadata.

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace xdyn {

struct RunMetadata {
    double eta = 0.0;
    double temperature = 0.0;  // K
    std::string shape;         // thin / broad / custom
    std::string solver;        // heom / redfield-secular / redfield-nonsecular
    int level = 0;             // HEOM truncation, 0 for Redfield
};

// Density matrices are stored in the eigenbasis of H_eff.
struct TrajectoryRecord {
    std::vector<double> times_au;
    std::vector<Eigen::MatrixXcd> states;
    RunMetadata meta;

    std::size_t size() const { return times_au.size(); }

    void validate_monotone() const {
        for (std::size_t i = 1; i < times_au.size(); ++i)
            if (times_au[i] <= times_au[i - 1])
                throw std::invalid_argument("TrajectoryRecord: times must be strictly increasing");
    }
};

inline std::vector<double> uniform_grid_au(double t_end_au, double dt_au) {
    std::vector<double> g;
    const int n = static_cast<int>(std::round(t_end_au / dt_au));
    g.reserve(n + 1);
    for (int i = 0; i <= n; ++i) g.push_back(i * dt_au);
    return g;
}

}  // namespace xdyn
