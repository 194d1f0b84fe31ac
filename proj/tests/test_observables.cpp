#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

#include "xdyn/model.hpp"
#include "xdyn/observables.hpp"
#include "xdyn/trajectory.hpp"
#include "xdyn/units.hpp"

using namespace xdyn;

namespace {

TrajectoryRecord single_state(const Eigen::MatrixXcd& rho) {
    TrajectoryRecord tr;
    tr.times_au = {0.0};
    tr.states = {rho};
    return tr;
}

}  // namespace

TEST_CASE("operator basis is orthonormal and Hermitian") {
    for (const int d : {2, 3}) {
        const auto g = gell_mann_basis(d);
        REQUIRE((int)g.size() == d * d);
        for (std::size_t m = 0; m < g.size(); ++m) {
            CHECK(g[m].isApprox(g[m].adjoint(), 1e-14));
            for (std::size_t n = 0; n < g.size(); ++n) {
                const double inner = (g[m] * g[n]).trace().real();
                CHECK(inner == doctest::Approx(m == n ? 1.0 : 0.0).epsilon(1e-13));
            }
            // all but the identity element are traceless
            if (m > 0) CHECK(std::abs(g[m].trace()) < 1e-14);
        }
    }
}

TEST_CASE("purity and coherence extraction") {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(3, 3);
    rho(0, 0) = rho(1, 1) = 0.5;
    rho(0, 1) = rho(1, 0) = Complex(0.3, 0.0);
    const TrajectoryRecord tr = single_state(rho);

    CHECK(purity(tr)[0] == doctest::Approx(0.5 + 2 * 0.09).epsilon(1e-14));
    CHECK(coherence_modulus(tr, 0, 1)[0] == doctest::Approx(0.3));
    CHECK(population(tr, 0)[0] == doctest::Approx(0.5));
    CHECK_THROWS(coherence_modulus(tr, 0, 0));
    CHECK_THROWS(coherence_modulus(tr, 0, 5));

    // purity is basis independent
    const ExcitonNetwork net = ExcitonNetwork::canonical(canonical_j12());
    const EigenSystem es = diagonalize(build_hamiltonian(net),
                                       noise_projector(3, net.noise_site));
    const Eigen::MatrixXcd site = es.basis * rho * es.basis.transpose();
    CHECK(purity(single_state(site))[0] == doctest::Approx(purity(tr)[0]).epsilon(1e-13));
}

TEST_CASE("site populations rotate correctly and sum to one") {
    const ExcitonNetwork net = ExcitonNetwork::canonical(canonical_j12());
    const EigenSystem es = diagonalize(build_hamiltonian(net),
                                       noise_projector(3, net.noise_site));
    // eigenstate |B> expressed in the site basis
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(3, 3);
    rho(2, 2) = 1.0;
    const auto pops = site_populations(single_state(rho), es);
    REQUIRE(pops.size() == 1);
    CHECK(pops[0].sum() == doctest::Approx(1.0).epsilon(1e-13));
    for (int i = 0; i < 3; ++i)
        CHECK(pops[0](i) == doctest::Approx(es.basis(i, 2) * es.basis(i, 2)).epsilon(1e-12));
}

TEST_CASE("thermal reference quantities") {
    Eigen::VectorXd e(3);
    e << 0.0, 0.0, 0.0;
    CHECK(boltzmann_purity(e, 1.0) == doctest::Approx(1.0 / 3.0));
    CHECK(boltzmann_populations(e, 1.0)(0) == doctest::Approx(1.0 / 3.0));

    e << 0.0, 1.0, 2.0;
    const Eigen::VectorXd p = boltzmann_populations(e, 2.0);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p(1) / p(0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    // beta -> infinity collapses onto the ground state
    CHECK(boltzmann_purity(e, 1e3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("accessible-state volume of simple maps") {
    const int d = 2;
    const auto grid = std::vector<double>{0.0, 1.0, 2.0};

    SUBCASE("unitary evolution preserves the volume") {
        Eigen::Matrix2cd h;
        h << 0.3, Complex(0.1, 0.05), Complex(0.1, -0.05), -0.2;
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> sol(h);
        const auto prop = [&](const Eigen::MatrixXcd& g) {
            TrajectoryRecord tr;
            tr.times_au = grid;
            for (const double t : grid) {
                const Eigen::Vector2cd ph =
                    (Complex(0, -1) * t * sol.eigenvalues().array()).exp();
                const Eigen::Matrix2cd u = sol.eigenvectors() * ph.asDiagonal() *
                                           sol.eigenvectors().adjoint();
                tr.states.push_back(u * g * u.adjoint());
            }
            return tr;
        };
        const BlochVolume v = bloch_volume(prop, d, grid);
        for (const double x : v.v_affine) CHECK(x == doctest::Approx(1.0).epsilon(1e-10));
        for (const double x : v.v_full) CHECK(x == doctest::Approx(1.0).epsilon(1e-10));
    }

    SUBCASE("uniform depolarisation shrinks the volume as the cube") {
        const auto prop = [&](const Eigen::MatrixXcd& g) {
            TrajectoryRecord tr;
            tr.times_au = grid;
            for (const double t : grid) {
                const double s = std::exp(-0.5 * t);
                const Eigen::MatrixXcd part =
                    s * g + (1.0 - s) * g.trace() / double(d) *
                                 Eigen::MatrixXcd::Identity(d, d);
                tr.states.push_back(part);
            }
            return tr;
        };
        const BlochVolume v = bloch_volume(prop, d, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double s = std::exp(-0.5 * grid[i]);
            CHECK(v.v_affine[i] == doctest::Approx(s * s * s).epsilon(1e-10));
            // the full map determinant includes the trivial trace row
            CHECK(v.v_full[i] == doctest::Approx(s * s * s).epsilon(1e-10));
        }
    }
}

TEST_CASE("dominant frequency of a synthetic beat") {
    const double w0 = 2.0 * std::numbers::pi / 19000.0;  // ~460 fs period
    std::vector<double> t, x;
    for (int i = 0; i <= 800; ++i) {
        t.push_back(i * 100.0);
        x.push_back(0.2 + 0.4 * std::cos(w0 * t.back()) * std::exp(-t.back() / 6e4));
    }
    const double w = dominant_frequency(t, x, 0.0, t.back(), 5.0 * w0);
    CHECK(w == doctest::Approx(w0).epsilon(0.01));
    CHECK_THROWS(dominant_frequency(t, x, 0.0, 300.0, 5.0 * w0));
}
