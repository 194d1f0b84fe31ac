#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "xdyn/bath.hpp"
#include "xdyn/model.hpp"
#include "xdyn/redfield.hpp"
#include "xdyn/units.hpp"

using namespace xdyn;

namespace {

struct Setup {
    ExcitonNetwork net;
    BathSpec bath;
    EigenSystem es;
    CorrelationExpansion exp;
    RedfieldTensor rt;
};

Setup make_setup(double eta = 0.01, bool lamb_shift = true) {
    Setup s;
    s.net = ExcitonNetwork::canonical(canonical_j12());
    s.bath = set_eta(SpectralDensity::thin(), eta, s.net, 298.0);
    s.es = diagonalize(
        effective_hamiltonian(build_hamiltonian(s.net), s.bath.lambda,
                              s.net.noise_site),
        noise_projector(3, s.net.noise_site));
    s.exp = expand_correlation_auto(s.bath);
    s.rt = build_tensor(s.es, s.exp, lamb_shift);
    return s;
}

Eigen::MatrixXcd bright_state() {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(3, 3);
    rho(2, 2) = 1.0;
    return rho;
}

}  // namespace

TEST_CASE("tensor conserves trace identically") {
    const Setup s = make_setup();
    const int d = 3;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            Complex col = 0.0;
            for (int n = 0; n < d; ++n) col += s.rt.at(n, n, j, k);
            CAPTURE(j);
            CAPTURE(k);
            CHECK(std::abs(col) < 1e-18);
        }
}

TEST_CASE("tensor satisfies the Hermiticity pairing") {
    const Setup s = make_setup();
    const int d = 3;
    for (int n = 0; n < d; ++n)
        for (int m = 0; m < d; ++m)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k)
                    CHECK(std::abs(s.rt.at(n, m, j, k) -
                                   std::conj(s.rt.at(m, n, k, j))) < 1e-18);
}

TEST_CASE("population rates reduce to the golden rule") {
    const Setup s = make_setup();
    const int dm = 0, dp = 1, b = 2;
    const Eigen::MatrixXd& v = s.es.coupling_op;

    for (const auto& [to, from] : {std::pair{dp, b}, {dm, b}}) {
        const double e = s.rt.energies(from) - s.rt.energies(to);
        const double expected = 2.0 * v(to, from) * v(to, from) * s.bath.sd(e) *
                                (bose(e, s.bath.beta()) + 1.0);
        CHECK(s.rt.at(to, to, from, from).real() ==
              doctest::Approx(expected).epsilon(1e-3));
    }

    // uphill rates suppressed by the Boltzmann factor
    const RateElements el = rate_elements(s.rt);
    const double e = s.rt.energies(b) - s.rt.energies(dp);
    CHECK(el.up_pp / el.down_pp ==
          doctest::Approx(std::exp(-s.bath.beta() * e)).epsilon(1e-6));
    CHECK(el.up_pp < 1e-2 * el.down_pp);
}

TEST_CASE("coherence-generation element mixes both downhill channels") {
    const Setup s = make_setup(0.01, false);
    const RateElements el = rate_elements(s.rt);
    const Eigen::MatrixXd& v = s.es.coupling_op;
    const int dm = 0, dp = 1, b = 2;
    const double kp = s.bath.sd(s.rt.energies(b) - s.rt.energies(dp)) *
                      (bose(s.rt.energies(b) - s.rt.energies(dp), s.bath.beta()) + 1.0);
    const double km = s.bath.sd(s.rt.energies(b) - s.rt.energies(dm)) *
                      (bose(s.rt.energies(b) - s.rt.energies(dm), s.bath.beta()) + 1.0);
    const double expected = v(dp, b) * v(b, dm) * (kp + km);
    CHECK(el.down_pm.real() == doctest::Approx(expected).epsilon(1e-3));
    // near-equality of the three downhill elements at weak coupling
    const double mean = (el.down_pp + el.down_mm + std::abs(el.down_pm)) / 3.0;
    CHECK(std::abs(el.down_pp - mean) / mean < 0.1);
    CHECK(std::abs(el.down_mm - mean) / mean < 0.1);
    CHECK(std::abs(std::abs(el.down_pm) - mean) / mean < 0.1);
}

TEST_CASE("dropping the Lamb shift keeps the dissipative part") {
    const Setup full = make_setup(0.01, true);
    const Setup bare = make_setup(0.01, false);
    // population-transfer rates are unchanged
    for (int n = 0; n < 3; ++n)
        for (int j = 0; j < 3; ++j)
            CHECK(full.rt.at(n, n, j, j).real() ==
                  doctest::Approx(bare.rt.at(n, n, j, j).real()).epsilon(1e-12));
}

TEST_CASE("secular propagation keeps diagonal states diagonal") {
    const Setup s = make_setup();
    const auto grid = uniform_grid_au(units::fs_to_au(500.0), units::fs_to_au(10.0));
    const TrajectoryRecord traj = propagate_redfield(
        bright_state(), s.rt, RedfieldMode::secular, grid);
    for (const auto& rho : traj.states) {
        for (int n = 0; n < 3; ++n)
            for (int m = 0; m < 3; ++m)
                if (n != m) CHECK(std::abs(rho(n, m)) == 0.0);
        CHECK(std::abs(rho.trace().real() - 1.0) < 1e-10);
    }
}

TEST_CASE("secular populations match an independent kinetic integration") {
    const Setup s = make_setup();
    const auto grid = uniform_grid_au(units::fs_to_au(400.0), units::fs_to_au(50.0));
    const TrajectoryRecord traj = propagate_redfield(
        bright_state(), s.rt, RedfieldMode::secular, grid);

    // Pauli master equation with the same population block, fine RK4
    Eigen::Matrix3d m;
    for (int n = 0; n < 3; ++n)
        for (int j = 0; j < 3; ++j) m(n, j) = s.rt.at(n, n, j, j).real();
    Eigen::Vector3d p(0.0, 0.0, 1.0);
    const double dt = units::fs_to_au(0.005);
    std::size_t gi = 0;
    for (double t = 0.0; gi < grid.size(); ) {
        if (t >= grid[gi] - 1e-9) {
            for (int n = 0; n < 3; ++n)
                CHECK(traj.states[gi](n, n).real() ==
                      doctest::Approx(p(n)).epsilon(1e-4));
            ++gi;
            continue;
        }
        const Eigen::Vector3d k1 = m * p;
        const Eigen::Vector3d k2 = m * (p + 0.5 * dt * k1);
        const Eigen::Vector3d k3 = m * (p + 0.5 * dt * k2);
        const Eigen::Vector3d k4 = m * (p + dt * k3);
        p += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += dt;
    }
}

TEST_CASE("non-secular terms generate coherence from a population") {
    const Setup s = make_setup();
    const auto grid = uniform_grid_au(units::fs_to_au(300.0), units::fs_to_au(5.0));
    const TrajectoryRecord ns = propagate_redfield(
        bright_state(), s.rt, RedfieldMode::nonsecular, grid);
    double peak = 0.0;
    for (const auto& rho : ns.states) {
        peak = std::max(peak, std::abs(rho(0, 1)));
        CHECK(std::abs(rho.trace().real() - 1.0) < 1e-8);
        CHECK(rho.isApprox(rho.adjoint(), 1e-8));
    }
    CHECK(peak > 0.2);
}

TEST_CASE("propagation input validation") {
    const Setup s = make_setup();
    CHECK_THROWS(propagate_redfield(Eigen::MatrixXcd::Zero(2, 2), s.rt,
                                    RedfieldMode::secular, {0.0, 1.0}));
    CHECK_THROWS(propagate_redfield(bright_state(), s.rt,
                                    RedfieldMode::secular, {}));
    CHECK_THROWS(propagate_redfield(bright_state(), s.rt,
                                    RedfieldMode::secular, {0.0, 2.0, 1.0}));
}
