// redfield.hpp — Bloch-Redfield tensor from the eigenbasis coupling
// operator and the half-Fourier transform of the bath correlation
// function; secular and non-secular propagation of the interaction
// picture master equation
//   d rho_nm / dt = sum_jk R_nmjk e^{i(E_nm - E_jk) t} rho_jk.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "xdyn/bath.hpp"
#include "xdyn/model.hpp"
#include "xdyn/ode.hpp"
#include "xdyn/trajectory.hpp"

namespace xdyn {

enum class RedfieldMode { secular, nonsecular };

struct RedfieldTensor {
    int dim = 0;
    std::vector<Complex> r;        // d^4, index ((n d + m) d + j) d + k
    std::vector<std::uint8_t> secular_mask;
    Eigen::VectorXd energies;

    Complex at(int n, int m, int j, int k) const {
        return r[((n * dim + m) * dim + j) * dim + k];
    }
    bool is_secular(int n, int m, int j, int k) const {
        return secular_mask[((n * dim + m) * dim + j) * dim + k] != 0;
    }
};

// Tensor from an explicit half-Fourier transform Gamma(w) = Int_0^inf
// C(t) e^{iwt} dt. With V real symmetric and E_xy = E_x - E_y:
//   R_nmjk = V_nj V_km [Gamma(E_jn) + Gamma(E_km)^*]
//          - delta_mk sum_a V_na V_aj Gamma(E_ja)
//          - delta_jn sum_a V_ka V_am Gamma(E_ka)^*
// The real (golden-rule) part of the secular population rates reduces to
// 2 |V_nm|^2 J(E)(n(E)+1), which pins the absolute normalisation.
inline RedfieldTensor build_tensor(const EigenSystem& es,
                                   const std::function<Complex(double)>& gamma_fn,
                                   bool lamb_shift = true) {
    const int d = es.dim();
    RedfieldTensor rt;
    rt.dim = d;
    rt.energies = es.energies;
    rt.r.assign(static_cast<std::size_t>(d) * d * d * d, Complex(0));
    rt.secular_mask.assign(rt.r.size(), 0);

    auto gam = [&](double w) -> Complex {
        const Complex g = gamma_fn(w);
        return lamb_shift ? g : Complex(g.real(), 0.0);
    };

    // cache Gamma at the d^2 transition frequencies
    Eigen::MatrixXcd gcache(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            gcache(a, b) = gam(es.energies(a) - es.energies(b));

    const Eigen::MatrixXd& v = es.coupling_op;
    const double e_scale = es.energies.cwiseAbs().maxCoeff();
    const double freq_tol = 1e-9 * std::max(e_scale, 1e-300);

    for (int n = 0; n < d; ++n)
        for (int m = 0; m < d; ++m)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    Complex val = v(n, j) * v(k, m) *
                                  (gcache(j, n) + std::conj(gcache(k, m)));
                    if (m == k)
                        for (int a = 0; a < d; ++a)
                            val -= v(n, a) * v(a, j) * gcache(j, a);
                    if (j == n)
                        for (int a = 0; a < d; ++a)
                            val -= v(k, a) * v(a, m) * std::conj(gcache(k, a));
                    const std::size_t idx = ((n * d + m) * d + j) * d + k;
                    rt.r[idx] = val;
                    const double e_nm = es.energies(n) - es.energies(m);
                    const double e_jk = es.energies(j) - es.energies(k);
                    rt.secular_mask[idx] = std::abs(e_nm - e_jk) < freq_tol ? 1 : 0;
                }
    return rt;
}

inline RedfieldTensor build_tensor(const EigenSystem& es,
                                   const CorrelationExpansion& exp,
                                   bool lamb_shift = true) {
    return build_tensor(
        es, [&exp](double w) { return exp.half_fourier(w); }, lamb_shift);
}

// Golden-rule fallback when no exponential expansion is available: the
// real part of Gamma is J(w)(n(w)+1) in closed form, the Lamb shift is
// dropped.
inline RedfieldTensor build_tensor_golden_rule(const EigenSystem& es,
                                               const BathSpec& bath) {
    return build_tensor(
        es,
        [&bath](double w) -> Complex {
            if (w == 0.0) return Complex(0.0);  // superohmic: J ~ w^3
            return Complex(bath.sd(w) * (bose(w, bath.beta()) + 1.0), 0.0);
        },
        false);
}

// Named downhill/uphill elements (Eqs. for B -> doublet transfer).
struct RateElements {
    double down_pp;        // R_{D+D+,BB}
    double down_mm;        // R_{D-D-,BB}
    Complex down_pm;       // R_{D+D-,BB}
    double up_pp;          // R_{BB,D+D+}
    double up_mm;          // R_{BB,D-D-}
};

inline RateElements rate_elements(const RedfieldTensor& rt) {
    if (rt.dim != 3) throw std::invalid_argument("rate_elements: 3-level model expected");
    const int dm = 0, dp = 1, b = 2;
    RateElements e;
    e.down_pp = rt.at(dp, dp, b, b).real();
    e.down_mm = rt.at(dm, dm, b, b).real();
    e.down_pm = rt.at(dp, dm, b, b);
    e.up_pp = rt.at(b, b, dp, dp).real();
    e.up_mm = rt.at(b, b, dm, dm).real();
    return e;
}

// Propagate from rho0 (eigenbasis) over t_grid. The ODE is solved in the
// interaction picture; returned states are Schroedinger-picture.
inline TrajectoryRecord propagate_redfield(const Eigen::MatrixXcd& rho0,
                                           const RedfieldTensor& rt,
                                           RedfieldMode mode,
                                           const std::vector<double>& t_grid_au,
                                           const ode::Options& opt = {}) {
    const int d = rt.dim;
    if (rho0.rows() != d || rho0.cols() != d)
        throw std::invalid_argument("propagate_redfield: dimension mismatch");
    if (t_grid_au.empty())
        throw std::invalid_argument("propagate_redfield: empty time grid");

    const bool secular = (mode == RedfieldMode::secular);
    const Eigen::VectorXd& en = rt.energies;

    auto rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy.setZero();
        for (int n = 0; n < d; ++n)
            for (int m = 0; m < d; ++m) {
                Complex acc = 0.0;
                const double e_nm = en(n) - en(m);
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < d; ++k) {
                        const std::size_t idx = ((n * d + m) * d + j) * d + k;
                        if (secular) {
                            if (!rt.secular_mask[idx]) continue;
                            acc += rt.r[idx] * y[j * d + k];
                        } else {
                            const double w = e_nm - (en(j) - en(k));
                            const Complex phase(std::cos(w * t), std::sin(w * t));
                            acc += rt.r[idx] * phase * y[j * d + k];
                        }
                    }
                dy[n * d + m] = acc;
            }
    };

    Eigen::VectorXcd y(d * d);
    for (int n = 0; n < d; ++n)
        for (int m = 0; m < d; ++m) y[n * d + m] = rho0(n, m);

    TrajectoryRecord traj;
    traj.times_au = t_grid_au;
    traj.states.reserve(t_grid_au.size());

    double t = 0.0;
    for (const double tg : t_grid_au) {
        if (tg < t) throw std::invalid_argument("propagate_redfield: grid must ascend from 0");
        if (tg > t) {
            ode::integrate_adaptive(rhs, y, t, tg, opt);
            t = tg;
        }
        Eigen::MatrixXcd rho(d, d);
        for (int n = 0; n < d; ++n)
            for (int m = 0; m < d; ++m) {
                const double e_nm = en(n) - en(m);
                // back to the Schroedinger picture
                rho(n, m) = y[n * d + m] *
                            Complex(std::cos(e_nm * t), -std::sin(e_nm * t));
            }
        traj.states.push_back(std::move(rho));
    }
    traj.meta.solver = secular ? "redfield-secular" : "redfield-nonsecular";
    return traj;
}

}  // namespace xdyn
