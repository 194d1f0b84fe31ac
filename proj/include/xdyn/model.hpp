// model.hpp — site-basis exciton network, effective Hamiltonian and
// eigenbasis quantities.
//
// The canonical network is three sites: sites 1 and 2 degenerate and
// strongly coupled (J12), site 3 detuned to -J12 and weakly coupled to
// site 2 (J23 = J12/10). Environmental noise enters on site 2 only.
// Diagonalising yields a high-energy bright state |B> ~ (|1>+|2>)/sqrt(2)
// and a closely spaced dark doublet |D±> ~ (|1>-|2>)/2 ± |3>/sqrt(2).

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "xdyn/units.hpp"

namespace xdyn {

using Complex = std::complex<double>;

struct ExcitonNetwork {
    Eigen::VectorXd epsilon;   // site energies, a.u.
    Eigen::MatrixXd coupling;  // symmetric coherent couplings, zero diagonal
    int noise_site = 1;        // 0-based site carrying the bath coupling

    int n_sites() const { return static_cast<int>(epsilon.size()); }

    void validate() const {
        const int n = n_sites();
        if (coupling.rows() != n || coupling.cols() != n)
            throw std::invalid_argument("ExcitonNetwork: epsilon/coupling dimension mismatch");
        if (!coupling.isApprox(coupling.transpose(), 1e-14))
            throw std::invalid_argument("ExcitonNetwork: coupling matrix must be symmetric");
        for (int i = 0; i < n; ++i)
            if (coupling(i, i) != 0.0)
                throw std::invalid_argument("ExcitonNetwork: coupling diagonal must vanish");
        if (noise_site < 0 || noise_site >= n)
            throw std::invalid_argument("ExcitonNetwork: noise_site out of range");
    }

    // Reference topology: eps = {0, 0, -J12}, J23 = J12/10, J13 = 0, noise on site 2.
    static ExcitonNetwork canonical(double j12) {
        ExcitonNetwork net;
        net.epsilon = Eigen::Vector3d(0.0, 0.0, -j12);
        net.coupling = Eigen::Matrix3d::Zero();
        net.coupling(0, 1) = net.coupling(1, 0) = j12;
        net.coupling(1, 2) = net.coupling(2, 1) = j12 / 10.0;
        net.noise_site = 1;
        return net;
    }
};

inline Eigen::MatrixXd build_hamiltonian(const ExcitonNetwork& net) {
    net.validate();
    Eigen::MatrixXd h = net.coupling;
    h.diagonal() = net.epsilon;
    return h;
}

// Site projector for the noise-carrying site; this is the system side of
// the system-bath coupling.
inline Eigen::MatrixXd noise_projector(int dim, int noise_site) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(dim, dim);
    p(noise_site, noise_site) = 1.0;
    return p;
}

// H_eff = H_S + lambda |s><s|. The renormalisation shift is positive, so
// the coupled site is raised.
inline Eigen::MatrixXd effective_hamiltonian(const Eigen::MatrixXd& h_s,
                                             double lambda, int noise_site) {
    if (h_s.rows() != h_s.cols())
        throw std::invalid_argument("effective_hamiltonian: H must be square");
    if (noise_site < 0 || noise_site >= h_s.rows())
        throw std::invalid_argument("effective_hamiltonian: noise_site out of range");
    Eigen::MatrixXd h = h_s;
    h(noise_site, noise_site) += lambda;
    return h;
}

struct EigenSystem {
    Eigen::VectorXd energies;    // ascending
    Eigen::MatrixXd basis;       // U, columns = eigenvectors in the site basis
    Eigen::MatrixXd coupling_op; // V = U^T S U

    int dim() const { return static_cast<int>(energies.size()); }

    // eigenindex labels for the 3-site model (ascending energies)
    int idx_dminus() const { return 0; }
    int idx_dplus() const { return 1; }
    int idx_bright() const { return dim() - 1; }

    double gap_bright_dplus() const { return energies(idx_bright()) - energies(idx_dplus()); }
    double gap_bright_dminus() const { return energies(idx_bright()) - energies(idx_dminus()); }
    double gap_doublet() const { return energies(idx_dplus()) - energies(idx_dminus()); }
    double mean_bright_gap() const {
        return 0.5 * (gap_bright_dplus() + gap_bright_dminus());
    }
};

namespace detail {

// Analytic eigenvectors of the unshifted canonical model, used only as a
// tie-break reference when numerical eigenvalues are degenerate.
inline Eigen::Matrix3d canonical_reference_vectors() {
    Eigen::Matrix3d ref;
    const double s = 1.0 / std::sqrt(2.0);
    ref.col(0) << 0.5, -0.5, -s;  // |D->
    ref.col(1) << 0.5, -0.5, s;   // |D+>
    ref.col(2) << s, s, 0.0;      // |B>
    return ref;
}

}  // namespace detail

// Diagonalise the (real symmetric) effective Hamiltonian and transform the
// bath coupling operator into the eigenbasis. Eigenvalues are sorted
// ascending; on exact degeneracy columns are ordered by overlap with the
// analytic |D->, |D+>, |B> vectors. Each eigenvector's largest-magnitude
// component is fixed real positive.
inline EigenSystem diagonalize(const Eigen::MatrixXd& h_eff,
                               const Eigen::MatrixXd& s_op) {
    if (!h_eff.isApprox(h_eff.transpose(), 1e-12))
        throw std::invalid_argument("diagonalize: Hamiltonian must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h_eff);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("diagonalize: eigen decomposition failed");

    EigenSystem es;
    es.energies = solver.eigenvalues();
    es.basis = solver.eigenvectors();
    const int d = es.dim();

    // degenerate pairs: order by overlap with the analytic reference states
    if (d == 3) {
        const Eigen::Matrix3d ref = detail::canonical_reference_vectors();
        for (int i = 0; i + 1 < d; ++i) {
            if (std::abs(es.energies(i + 1) - es.energies(i)) < 1e-12) {
                const double oi = std::abs(ref.col(i).dot(es.basis.col(i)));
                const double oj = std::abs(ref.col(i).dot(es.basis.col(i + 1)));
                if (oj > oi) {
                    es.basis.col(i).swap(es.basis.col(i + 1));
                    std::swap(es.energies(i), es.energies(i + 1));
                }
            }
        }
    }

    // phase convention: largest-magnitude component real positive
    for (int c = 0; c < d; ++c) {
        int imax = 0;
        es.basis.col(c).cwiseAbs().maxCoeff(&imax);
        if (es.basis(imax, c) < 0.0) es.basis.col(c) *= -1.0;
    }

    es.coupling_op = es.basis.transpose() * s_op * es.basis;
    return es;
}

enum class Basis { site, eigen };

struct DensityMatrix {
    Eigen::MatrixXcd mat;
    Basis basis = Basis::eigen;
};

inline void check_density(const Eigen::MatrixXcd& rho, double herm_tol = 1e-12,
                          double trace_tol = 1e-10) {
    if (!rho.isApprox(rho.adjoint(), herm_tol))
        throw std::invalid_argument("density matrix not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > trace_tol ||
        std::abs(rho.trace().imag()) > trace_tol)
        throw std::invalid_argument("density matrix trace != 1");
}

inline DensityMatrix to_site_basis(const DensityMatrix& rho, const EigenSystem& es) {
    if (rho.basis != Basis::eigen)
        throw std::invalid_argument("to_site_basis: expected eigenbasis density matrix");
    return {es.basis * rho.mat * es.basis.transpose(), Basis::site};
}

inline DensityMatrix to_eigen_basis(const DensityMatrix& rho, const EigenSystem& es) {
    if (rho.basis != Basis::site)
        throw std::invalid_argument("to_eigen_basis: expected site-basis density matrix");
    return {es.basis.transpose() * rho.mat * es.basis, Basis::eigen};
}

// The physical energy scale: J12 is fixed so that the dissipation-free gap
// between |B> and the doublet centre coincides with the thin spectral
// density peak Omega_2 (about 500 cm^-1 for J12).
inline double canonical_j12(double omega_peak_au = 4.5639e-3) {
    const ExcitonNetwork unit = ExcitonNetwork::canonical(1.0);
    const EigenSystem es = diagonalize(build_hamiltonian(unit),
                                       noise_projector(3, unit.noise_site));
    const double gap_unit =
        es.energies(2) - 0.5 * (es.energies(0) + es.energies(1));
    return omega_peak_au / gap_unit;
}

}  // namespace xdyn
