#pragma once

#include "sdlps/errors.hpp"

#include <array>
#include <cmath>
#include <cstddef>

namespace sdlps {

/// Adaptive embedded Runge-Kutta pair of orders 4/5 (Dormand-Prince).
/// Integrates forward or backward depending on the sign of t1 - t0. The
/// observer sees every accepted step and can stop the run early.
template <std::size_t N, typename F>
bool rk45_step(F& f, double t, const std::array<double, N>& y, double h,
               std::array<double, N>& y5, double& err_norm, double rtol, double atol) {
    using State = std::array<double, N>;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const State k1 = f(t, y);
    State tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    const State k2 = f(t + c2 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    const State k3 = f(t + c3 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const State k4 = f(t + c4 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    const State k5 = f(t + c5 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] +
                 h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const State k6 = f(t + h, tmp);
    for (std::size_t i = 0; i < N; ++i)
        y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const State k7 = f(t + h, y5);

    err_norm = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                e6 * k6[i] + e7 * k7[i]);
        const double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        err_norm = std::max(err_norm, std::abs(err) / scale);
    }
    return std::isfinite(err_norm) && err_norm <= 1.0;
}

/// On return, y holds the state at t1 (or at the point where the observer
/// stopped the run).
template <std::size_t N, typename F, typename Observer>
void rk45_integrate(F f, double t0, double t1, std::array<double, N>& y, double rtol,
                    double atol, Observer observer) {
    if (t0 == t1) return;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    double t = t0;
    double h = dir * span / 128.0;
    const double h_min = span * 1e-14;
    std::array<double, N> y_next;
    std::size_t rejected_in_a_row = 0;

    while (dir * (t1 - t) > 0.0) {
        if (std::abs(h) > std::abs(t1 - t)) h = t1 - t;
        double err_norm = 0.0;
        const bool accept = rk45_step(f, t, y, h, y_next, err_norm, rtol, atol);
        if (accept) {
            rejected_in_a_row = 0;
            const double t_new = t + h;
            if (!observer(t, y, t_new, y_next)) return;
            t = t_new;
            y = y_next;
            const double factor =
                err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
            h *= std::clamp(factor, 0.2, 5.0);
        } else {
            if (++rejected_in_a_row > 200 || std::abs(h) <= h_min) {
                throw NumericalError("rk45: step size underflow");
            }
            const double factor = std::isfinite(err_norm) && err_norm > 0.0
                                      ? std::max(0.1, 0.9 * std::pow(err_norm, -0.2))
                                      : 0.1;
            h *= factor;
        }
    }
}

} // namespace sdlps
