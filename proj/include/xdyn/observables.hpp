// observables.hpp — derived quantities: populations (eigen and site
// basis), coherence moduli, purity, the Bloch-volume non-Markovianity
// measure, and beat-frequency extraction.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "xdyn/model.hpp"
#include "xdyn/trajectory.hpp"

namespace xdyn {

inline std::vector<double> coherence_modulus(const TrajectoryRecord& traj, int a, int b) {
    if (traj.states.empty()) return {};
    const int d = static_cast<int>(traj.states.front().rows());
    if (a < 0 || b < 0 || a >= d || b >= d || a == b)
        throw std::invalid_argument("coherence_modulus: invalid index pair");
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& rho : traj.states) out.push_back(std::abs(rho(a, b)));
    return out;
}

inline std::vector<double> purity(const TrajectoryRecord& traj) {
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& rho : traj.states)
        out.push_back((rho * rho).trace().real());
    return out;
}

inline std::vector<double> population(const TrajectoryRecord& traj, int state) {
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& rho : traj.states) out.push_back(rho(state, state).real());
    return out;
}

// diagonal of U rho U^T per time point (trajectories are eigenbasis)
inline std::vector<Eigen::VectorXd> site_populations(const TrajectoryRecord& traj,
                                                     const EigenSystem& es) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(traj.size());
    for (const auto& rho : traj.states) {
        const Eigen::MatrixXcd site = es.basis * rho * es.basis.transpose();
        out.push_back(site.diagonal().real());
    }
    return out;
}

inline double boltzmann_purity(const Eigen::VectorXd& energies, double beta) {
    const Eigen::ArrayXd w = (-beta * (energies.array() - energies.minCoeff())).exp();
    const Eigen::ArrayXd p = w / w.sum();
    return (p * p).sum();
}

inline Eigen::VectorXd boltzmann_populations(const Eigen::VectorXd& energies, double beta) {
    const Eigen::ArrayXd w = (-beta * (energies.array() - energies.minCoeff())).exp();
    return (w / w.sum()).matrix();
}

// Orthonormal Hermitian operator basis: G_0 = 1/sqrt(d), then for each
// pair j<k the real and imaginary off-diagonal generators, then the
// diagonal (generalized Gell-Mann) generators. Tr G_m G_n = delta_mn.
inline std::vector<Eigen::MatrixXcd> gell_mann_basis(int d) {
    std::vector<Eigen::MatrixXcd> g;
    g.reserve(d * d);
    g.push_back(Eigen::MatrixXcd::Identity(d, d) / std::sqrt(double(d)));
    const double s = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k) {
            Eigen::MatrixXcd re = Eigen::MatrixXcd::Zero(d, d);
            re(j, k) = re(k, j) = s;
            g.push_back(re);
            Eigen::MatrixXcd im = Eigen::MatrixXcd::Zero(d, d);
            im(j, k) = Complex(0, -s);
            im(k, j) = Complex(0, s);
            g.push_back(im);
        }
    for (int l = 1; l < d; ++l) {
        Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(d, d);
        const double norm = 1.0 / std::sqrt(double(l) * (l + 1));
        for (int j = 0; j < l; ++j) diag(j, j) = norm;
        diag(l, l) = -double(l) * norm;
        g.push_back(diag);
    }
    return g;
}

struct BlochVolume {
    std::vector<double> times_au;
    std::vector<double> v_affine;  // determinant of the traceless block
    std::vector<double> v_full;    // determinant of the full d^2 x d^2 map
};

// Volume of accessible states: each basis operator is pushed through the
// dynamical map (the propagator is linear, so non-positive Hermitian
// inputs with zero-initialized ADOs are fine), F_mn(t) = Tr(G_m phi_t[G_n]),
// V = det F. Trace preservation makes the G_0 row trivial; the affine
// (traceless) block determinant is the headline value.
inline BlochVolume bloch_volume(
    const std::function<TrajectoryRecord(const Eigen::MatrixXcd&)>& propagate,
    int d, const std::vector<double>& t_grid_au) {
    const auto basis = gell_mann_basis(d);
    const int m = static_cast<int>(basis.size());

    std::vector<TrajectoryRecord> evolved;
    evolved.reserve(m);
    for (const auto& g : basis) evolved.push_back(propagate(g));

    BlochVolume out;
    out.times_au = t_grid_au;
    out.v_affine.reserve(t_grid_au.size());
    out.v_full.reserve(t_grid_au.size());
    for (std::size_t s = 0; s < t_grid_au.size(); ++s) {
        Eigen::MatrixXd f(m, m);
        for (int row = 0; row < m; ++row)
            for (int col = 0; col < m; ++col)
                f(row, col) = (basis[row] * evolved[col].states[s]).trace().real();
        out.v_full.push_back(f.determinant());
        out.v_affine.push_back(f.bottomRightCorner(m - 1, m - 1).determinant());
    }
    return out;
}

// Dominant angular frequency of a (detrended, Hann-windowed) series by
// dense evaluation of the discrete-time Fourier transform; returns the
// argmax over (0, w_max].
inline double dominant_frequency(const std::vector<double>& times_au,
                                 const std::vector<double>& series,
                                 double t_min_au, double t_max_au,
                                 double w_max_au, int n_freq = 4000) {
    std::vector<double> t, x;
    for (std::size_t i = 0; i < times_au.size(); ++i)
        if (times_au[i] >= t_min_au && times_au[i] <= t_max_au) {
            t.push_back(times_au[i]);
            x.push_back(series[i]);
        }
    if (t.size() < 8)
        throw std::invalid_argument("dominant_frequency: window too short");
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    const double span = t.back() - t.front();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = (t[i] - t.front()) / span;  // Hann window
        x[i] = (x[i] - mean) * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * u));
    }
    double best_w = 0.0, best_a = -1.0;
    for (int j = 1; j <= n_freq; ++j) {
        const double w = w_max_au * j / n_freq;
        Complex acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            acc += x[i] * Complex(std::cos(w * t[i]), -std::sin(w * t[i]));
        if (std::abs(acc) > best_a) {
            best_a = std::abs(acc);
            best_w = w;
        }
    }
    return best_w;
}

}  // namespace xdyn
