// ode.hpp — embedded Dormand-Prince 5(4) step control for small dense
// systems (the Redfield master equation lives in d^2 complex dimensions).

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace xdyn::ode {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double initial_step = 1.0;   // a.u.
    double min_step = 1e-8;      // a.u.
    long max_steps = 50'000'000;
};

// Advances y from t0 to t1 in place. rhs(t, y, dydt).
template <class RHS>
void integrate_adaptive(RHS&& rhs, Eigen::VectorXcd& y, double t0, double t1,
                        const Options& opt = {}) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // difference to the embedded 4th-order solution
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    const auto n = y.size();
    Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);

    double t = t0;
    double h = std::min(opt.initial_step, t1 - t0);
    rhs(t, y, k1);

    for (long step = 0; step < opt.max_steps; ++step) {
        if (t >= t1) return;
        h = std::min(h, t1 - t);

        tmp = y + h * a21 * k1;
        rhs(t + c2 * h, tmp, k2);
        tmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, tmp, k3);
        tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, tmp, k4);
        tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, tmp, k5);
        tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, tmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, ynew, k7);

        tmp = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double err = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc =
                opt.abs_tol +
                opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double e = std::abs(tmp[i]) / sc;
            err = std::max(err, e);
        }

        if (err <= 1.0) {
            t += h;
            y.swap(ynew);
            k1.swap(k7);  // FSAL
        } else {
            rhs(t, y, k1);  // k1 refers to current y again
        }
        const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        h *= std::min(5.0, std::max(0.2, fac));
        if (h < opt.min_step)
            throw std::runtime_error("ode: step size underflow (local error not reducible)");
    }
    throw std::runtime_error("ode: max step count exceeded");
}

}  // namespace xdyn::ode
