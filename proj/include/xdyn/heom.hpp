// heom.hpp — hierarchical equations of motion over auxiliary density
// operators indexed by occupation vectors of the correlation expansion.
//
// Working basis is the eigenbasis of H_eff (diagonal coherent part).
// ADOs are rescaled by prod_k (n_k! |alpha_k|^{n_k})^{1/2}; the physical
// top ADO is unaffected. Truncation is hard: ADOs above level L are zero.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "xdyn/bath.hpp"
#include "xdyn/trajectory.hpp"
#include "xdyn/units.hpp"

namespace xdyn {

struct HierarchyIndexing {
    int n_cor = 0;
    int level = 0;  // L
    std::vector<std::vector<std::uint8_t>> occ;  // ordinal -> occupation
    std::vector<std::int32_t> plus;   // ordinal * n_cor + k, -1 outside truncation
    std::vector<std::int32_t> minus;

    int n_ado() const { return static_cast<int>(occ.size()); }
};

inline std::uint64_t hierarchy_count(int n_cor, int level) {
    // C(n_cor + L, L)
    std::uint64_t c = 1;
    for (int i = 1; i <= level; ++i)
        c = c * static_cast<std::uint64_t>(n_cor + i) / static_cast<std::uint64_t>(i);
    return c;
}

inline HierarchyIndexing build_indexing(int n_cor, int level) {
    if (n_cor < 1 || level < 0)
        throw std::invalid_argument("build_indexing: need n_cor >= 1, L >= 0");
    HierarchyIndexing ix;
    ix.n_cor = n_cor;
    ix.level = level;

    // lexicographic enumeration of all occupations with sum <= L
    std::map<std::vector<std::uint8_t>, std::int32_t> rank;
    std::vector<std::uint8_t> cur(n_cor, 0);
    const auto total = [&](const std::vector<std::uint8_t>& v) {
        int s = 0;
        for (auto x : v) s += x;
        return s;
    };
    // odometer walk
    while (true) {
        ix.occ.push_back(cur);
        int k = n_cor - 1;
        while (k >= 0) {
            cur[k]++;
            if (total(cur) <= level) break;
            cur[k] = 0;
            --k;
        }
        if (k < 0) break;
    }
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(ix.occ.size()); ++i)
        rank[ix.occ[i]] = i;

    ix.plus.assign(static_cast<std::size_t>(ix.n_ado()) * n_cor, -1);
    ix.minus.assign(static_cast<std::size_t>(ix.n_ado()) * n_cor, -1);
    for (std::int32_t i = 0; i < ix.n_ado(); ++i) {
        std::vector<std::uint8_t> v = ix.occ[i];
        const int lvl = total(v);
        for (int k = 0; k < n_cor; ++k) {
            if (lvl < level) {
                v[k]++;
                ix.plus[std::size_t(i) * n_cor + k] = rank.at(v);
                v[k]--;
            }
            if (v[k] > 0) {
                v[k]--;
                ix.minus[std::size_t(i) * n_cor + k] = rank.at(v);
                v[k]++;
            }
        }
    }
    return ix;
}

struct HeomOptions {
    double dt_au = units::fs_to_au(0.1);     // fixed RK4 step
    double blowup_norm = 1e6;                // Frobenius norm abort threshold
    std::uint64_t memory_cap_bytes = 6ull << 30;
    bool interaction_picture = false;        // test-only alternative form
};

class HeomPropagator {
public:
    HeomPropagator(const CorrelationExpansion& expansion,
                   const Eigen::VectorXd& energies, const Eigen::MatrixXd& coupling_op,
                   int level, HeomOptions opts = {})
        : exp_(expansion),
          energies_(energies),
          v_(coupling_op),
          d_(static_cast<int>(energies.size())),
          opts_(opts) {
        const int n_cor = exp_.size();
        const std::uint64_t count = hierarchy_count(n_cor, level);
        const std::uint64_t bytes = count * std::uint64_t(d_) * d_ * 16 * 6;
        if (bytes > opts_.memory_cap_bytes)
            throw std::runtime_error(
                "HEOM memory cap exceeded: C(" + std::to_string(n_cor + level) +
                "," + std::to_string(level) + ") = " + std::to_string(count) +
                " ADOs");
        ix_ = build_indexing(n_cor, level);

        // per-(ado, k) coupling coefficients for the scaled hierarchy
        const std::size_t nk = std::size_t(ix_.n_ado()) * n_cor;
        damping_.resize(ix_.n_ado());
        c_plus_.assign(nk, 0.0);
        a_minus_.assign(nk, Complex(0));
        b_minus_.assign(nk, Complex(0));
        for (int i = 0; i < ix_.n_ado(); ++i) {
            Complex damp = 0.0;
            for (int k = 0; k < n_cor; ++k) {
                const double n_k = ix_.occ[i][k];
                const auto& tm = exp_.terms[k];
                damp += Complex(0, 1) * (n_k * tm.gamma);
                const double amod = std::abs(tm.alpha);
                const std::size_t off = std::size_t(i) * n_cor + k;
                if (ix_.plus[off] >= 0) c_plus_[off] = std::sqrt((n_k + 1.0) * amod);
                if (ix_.minus[off] >= 0 && amod > 0.0) {
                    const double s = std::sqrt(n_k / amod);
                    a_minus_[off] = s * tm.alpha;
                    b_minus_[off] = s * tm.alpha_conj;
                }
            }
            damping_[i] = damp;
        }

        // fixed-step RK4 stability: the stiffest eigenvalues come from the
        // damping i*sum n_k gamma_k at the deepest level
        double gmax = 0.0;
        for (const auto& tm : exp_.terms) gmax = std::max(gmax, std::abs(tm.gamma));
        stable_dt_au_ = level > 0 ? 2.5 / (level * gmax) : opts_.dt_au;
    }

    int n_ado() const { return ix_.n_ado(); }
    int dim() const { return d_; }
    const HierarchyIndexing& indexing() const { return ix_; }

    using State = std::vector<Complex>;

    State initial_state(const Eigen::MatrixXcd& rho0_top) const {
        if (rho0_top.rows() != d_ || rho0_top.cols() != d_)
            throw std::invalid_argument("HEOM: initial density matrix dimension mismatch");
        State s(std::size_t(ix_.n_ado()) * d_ * d_, Complex(0));
        for (int a = 0; a < d_; ++a)
            for (int b = 0; b < d_; ++b) s[std::size_t(a) * d_ + b] = rho0_top(a, b);
        return s;
    }

    Eigen::MatrixXcd top(const State& s) const {
        Eigen::MatrixXcd rho(d_, d_);
        for (int a = 0; a < d_; ++a)
            for (int b = 0; b < d_; ++b) rho(a, b) = s[std::size_t(a) * d_ + b];
        return rho;
    }

    // time derivative of the full scaled hierarchy
    void rhs(const State& s, double t, State& ds) const {
        const int d = d_, dd = d * d, n_cor = exp_.size();
        const Complex mi(0, -1);

        // coupling operator; time-dependent phases only in the
        // interaction-picture variant
        Eigen::MatrixXcd s_op(d, d);
        if (opts_.interaction_picture) {
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    const double w = (energies_(a) - energies_(b)) * t;
                    s_op(a, b) = v_(a, b) * Complex(std::cos(w), std::sin(w));
                }
        } else {
            s_op = v_.cast<Complex>();
        }

        std::vector<Complex> pacc(dd), aacc(dd), bacc(dd), tmp1(dd), tmp2(dd);
        for (int i = 0; i < ix_.n_ado(); ++i) {
            const Complex* x = s.data() + std::size_t(i) * dd;
            Complex* out = ds.data() + std::size_t(i) * dd;
            std::fill(pacc.begin(), pacc.end(), Complex(0));
            std::fill(aacc.begin(), aacc.end(), Complex(0));
            std::fill(bacc.begin(), bacc.end(), Complex(0));
            bool any_plus = false, any_minus = false;

            const std::size_t off0 = std::size_t(i) * n_cor;
            for (int k = 0; k < n_cor; ++k) {
                const std::int32_t ip = ix_.plus[off0 + k];
                if (ip >= 0) {
                    any_plus = true;
                    const double c = c_plus_[off0 + k];
                    const Complex* y = s.data() + std::size_t(ip) * dd;
                    for (int e = 0; e < dd; ++e) pacc[e] += c * y[e];
                }
                const std::int32_t im = ix_.minus[off0 + k];
                if (im >= 0) {
                    any_minus = true;
                    const Complex a = a_minus_[off0 + k];
                    const Complex b = b_minus_[off0 + k];
                    const Complex* y = s.data() + std::size_t(im) * dd;
                    for (int e = 0; e < dd; ++e) {
                        aacc[e] += a * y[e];
                        bacc[e] += b * y[e];
                    }
                }
            }

            // damping + coherent part
            const Complex damp = damping_[i];
            if (opts_.interaction_picture) {
                for (int e = 0; e < dd; ++e) out[e] = damp * x[e];
            } else {
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b) {
                        const int e = a * d + b;
                        out[e] = (damp + mi * (energies_(a) - energies_(b))) * x[e];
                    }
            }

            // -i [S, P]  and  -i (S A - B S)
            if (any_plus || any_minus) {
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b) {
                        Complex sp = 0, ps = 0, sa = 0, bs = 0;
                        for (int c = 0; c < d; ++c) {
                            sp += s_op(a, c) * pacc[c * d + b];
                            ps += pacc[a * d + c] * s_op(c, b);
                            sa += s_op(a, c) * aacc[c * d + b];
                            bs += bacc[a * d + c] * s_op(c, b);
                        }
                        out[a * d + b] += mi * (sp - ps + sa - bs);
                    }
            }
        }
    }

    // fixed-step classic RK4 over the output grid; grid spacing is cut
    // into integer substeps no longer than dt_au
    TrajectoryRecord propagate(const Eigen::MatrixXcd& rho0,
                               const std::vector<double>& t_grid_au) const {
        if (t_grid_au.empty())
            throw std::invalid_argument("HEOM propagate: empty time grid");
        State y = initial_state(rho0);
        State k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());

        TrajectoryRecord traj;
        traj.times_au = t_grid_au;
        traj.states.reserve(t_grid_au.size());
        traj.meta.solver = "heom";
        traj.meta.level = ix_.level;

        double t = 0.0;
        for (const double tg : t_grid_au) {
            if (tg < t)
                throw std::invalid_argument("HEOM propagate: grid must ascend from 0");
            if (tg > t) {
                const double span = tg - t;
                const double dt = std::min(opts_.dt_au, stable_dt_au_);
                const int nstep = std::max(1, (int)std::ceil(span / dt - 1e-9));
                const double h = span / nstep;
                for (int s = 0; s < nstep; ++s) {
                    step_rk4(y, t, h, k1, k2, k3, k4, tmp);
                    t += h;
                }
                t = tg;
            }
            check_finite(y, t);
            traj.states.push_back(opts_.interaction_picture
                                      ? to_schroedinger(top(y), t)
                                      : top(y));
        }
        return traj;
    }

    // largest ADO Frobenius norm, a hierarchy-health diagnostic
    double max_ado_norm(const State& s) const {
        const int dd = d_ * d_;
        double worst = 0.0;
        for (int i = 0; i < ix_.n_ado(); ++i) {
            double f = 0.0;
            for (int e = 0; e < dd; ++e) f += std::norm(s[std::size_t(i) * dd + e]);
            worst = std::max(worst, f);
        }
        return std::sqrt(worst);
    }

    const HeomOptions& options() const { return opts_; }
    const CorrelationExpansion& expansion() const { return exp_; }

    // resumable propagation support
    void advance(State& y, double& t, double t_target) const {
        State k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
        const double span = t_target - t;
        if (span <= 0) return;
        const double dt = std::min(opts_.dt_au, stable_dt_au_);
        const int nstep = std::max(1, (int)std::ceil(span / dt - 1e-9));
        const double h = span / nstep;
        for (int s = 0; s < nstep; ++s) {
            step_rk4(y, t, h, k1, k2, k3, k4, tmp);
            t += h;
        }
        t = t_target;
        check_finite(y, t);
    }

private:
    Eigen::MatrixXcd to_schroedinger(const Eigen::MatrixXcd& rho_int, double t) const {
        Eigen::MatrixXcd rho(d_, d_);
        for (int a = 0; a < d_; ++a)
            for (int b = 0; b < d_; ++b) {
                const double w = (energies_(a) - energies_(b)) * t;
                rho(a, b) = rho_int(a, b) * Complex(std::cos(w), -std::sin(w));
            }
        return rho;
    }

    void step_rk4(State& y, double t, double h, State& k1, State& k2, State& k3,
                  State& k4, State& tmp) const {
        const std::size_t n = y.size();
        rhs(y, t, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        rhs(tmp, t + 0.5 * h, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        rhs(tmp, t + 0.5 * h, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
        rhs(tmp, t + h, k4);
        const double h6 = h / 6.0;
        for (std::size_t i = 0; i < n; ++i)
            y[i] += h6 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }

    void check_finite(const State& s, double t) const {
        const double worst = max_ado_norm(s);
        if (!std::isfinite(worst) || worst > opts_.blowup_norm)
            throw std::runtime_error(
                "HEOM blow-up at t = " + std::to_string(units::au_to_fs(t)) +
                " fs (L = " + std::to_string(ix_.level) +
                ", dt = " + std::to_string(units::au_to_fs(opts_.dt_au)) +
                " fs, max ADO norm = " + std::to_string(worst) + ")");
    }

    CorrelationExpansion exp_;
    Eigen::VectorXd energies_;
    Eigen::MatrixXd v_;
    int d_;
    HeomOptions opts_;
    HierarchyIndexing ix_;
    std::vector<Complex> damping_;
    std::vector<double> c_plus_;
    std::vector<Complex> a_minus_;
    std::vector<Complex> b_minus_;
    double stable_dt_au_ = 0.0;
};

// ------------------------------ checkpointing -------------------------------

struct HeomCheckpoint {
    CorrelationExpansion expansion;
    int level = 0;
    int dim = 0;
    double t_au = 0.0;
    std::vector<Complex> ados;  // scaled, ordinal-ordered
};

inline void save_checkpoint(const std::string& path, const HeomCheckpoint& cp) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    const char magic[8] = {'X', 'D', 'Y', 'N', 'H', 'E', 'O', 'M'};
    const std::uint32_t version = 1;
    os.write(magic, 8);
    os.write(reinterpret_cast<const char*>(&version), 4);
    const std::uint32_t n_terms = cp.expansion.size(), n_poles = cp.expansion.n_poles;
    os.write(reinterpret_cast<const char*>(&n_terms), 4);
    os.write(reinterpret_cast<const char*>(&n_poles), 4);
    for (const auto& tm : cp.expansion.terms)
        os.write(reinterpret_cast<const char*>(&tm), sizeof(CorrelationTerm));
    const std::uint32_t level = cp.level, dim = cp.dim;
    os.write(reinterpret_cast<const char*>(&level), 4);
    os.write(reinterpret_cast<const char*>(&dim), 4);
    os.write(reinterpret_cast<const char*>(&cp.t_au), 8);
    const std::uint64_t n = cp.ados.size();
    os.write(reinterpret_cast<const char*>(&n), 8);
    os.write(reinterpret_cast<const char*>(cp.ados.data()),
             static_cast<std::streamsize>(n * sizeof(Complex)));
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

inline HeomCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, "XDYNHEOM", 8) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    std::uint32_t version = 0;
    is.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1)
        throw std::runtime_error("load_checkpoint: unsupported version");
    std::uint32_t n_terms = 0, n_poles = 0;
    is.read(reinterpret_cast<char*>(&n_terms), 4);
    is.read(reinterpret_cast<char*>(&n_poles), 4);
    HeomCheckpoint cp;
    cp.expansion.n_poles = static_cast<int>(n_poles);
    cp.expansion.terms.resize(n_terms);
    for (auto& tm : cp.expansion.terms)
        is.read(reinterpret_cast<char*>(&tm), sizeof(CorrelationTerm));
    std::uint32_t level = 0, dim = 0;
    is.read(reinterpret_cast<char*>(&level), 4);
    is.read(reinterpret_cast<char*>(&dim), 4);
    cp.level = static_cast<int>(level);
    cp.dim = static_cast<int>(dim);
    is.read(reinterpret_cast<char*>(&cp.t_au), 8);
    std::uint64_t n = 0;
    is.read(reinterpret_cast<char*>(&n), 8);
    cp.ados.resize(n);
    is.read(reinterpret_cast<char*>(cp.ados.data()),
            static_cast<std::streamsize>(n * sizeof(Complex)));
    if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
    return cp;
}

// ------------------------------ L-convergence -------------------------------

struct ConvergenceScan {
    std::vector<int> levels;
    std::vector<TrajectoryRecord> trajectories;
    std::vector<double> deltas;  // sup-norm of Re rho_{D-D+} between consecutive L
};

inline ConvergenceScan convergence_scan(const CorrelationExpansion& exp,
                                        const Eigen::VectorXd& energies,
                                        const Eigen::MatrixXd& coupling_op,
                                        const Eigen::MatrixXcd& rho0,
                                        const std::vector<double>& t_grid_au,
                                        const std::vector<int>& levels,
                                        const HeomOptions& opts = {}) {
    if (levels.empty())
        throw std::invalid_argument("convergence_scan: empty level list");
    ConvergenceScan scan;
    scan.levels = levels;
    for (const int level : levels) {
        HeomPropagator prop(exp, energies, coupling_op, level, opts);
        scan.trajectories.push_back(prop.propagate(rho0, t_grid_au));
    }
    for (std::size_t i = 1; i < scan.trajectories.size(); ++i) {
        double worst = 0.0;
        for (std::size_t s = 0; s < t_grid_au.size(); ++s) {
            const double a = scan.trajectories[i - 1].states[s](0, 1).real();
            const double b = scan.trajectories[i].states[s](0, 1).real();
            worst = std::max(worst, std::abs(a - b));
        }
        scan.deltas.push_back(worst);
    }
    return scan;
}

}  // namespace xdyn
