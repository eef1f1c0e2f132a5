#include "sdlps/drift.hpp"

#include "sdlps/errors.hpp"
#include "sdlps/pchip.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sdlps {

DriftFunction::DriftFunction(std::vector<double> grid, std::vector<double> values,
                             DriftProvenance provenance, double sigma2)
    : grid_(std::move(grid)), values_(std::move(values)), provenance_(provenance),
      sigma2_(sigma2) {
    if (grid_.size() < 2 || grid_.size() != values_.size()) {
        throw ValidationError("drift grid needs >= 2 points and matching values");
    }
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        if (!(grid_[i] > grid_[i - 1]))
            throw ValidationError("drift grid must be strictly increasing");
    }
    step_ = (grid_.back() - grid_.front()) / static_cast<double>(grid_.size() - 1);
    uniform_ = true;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        const double expect = grid_.front() + step_ * static_cast<double>(i);
        if (std::abs(grid_[i] - expect) > 1e-9 * (1.0 + std::abs(expect))) {
            uniform_ = false;
            break;
        }
    }
    const auto max_it = std::max_element(values_.begin(), values_.end());
    k_hat_ = grid_[static_cast<std::size_t>(max_it - values_.begin())];
    theta_hat_ = *max_it;
    d_theta_ = theta_hat_ - *std::min_element(values_.begin(), values_.end());
    if (!std::isfinite(d_theta_)) throw NumericalError("drift range d_theta is not finite");
}

double DriftFunction::eval_general(double x) const {
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
    const double frac = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
}

std::vector<double> make_uniform_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || !(hi > lo)) throw ValidationError("bad grid spec");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return g;
}

DriftFunction drift_from_mu(const ServiceRateCurve& curve, const InputProcess& input,
                            const std::vector<double>& grid) {
    const double rho = input.lambda * input.m;
    double sup_mu = 0.0;
    for (double x : grid) sup_mu = std::max(sup_mu, curve.mu_hat(x));
    if (rho >= sup_mu) {
        throw InstabilityError("unstabilizable: lambda*m = " + std::to_string(rho) +
                               " >= sup mu_hat = " + std::to_string(sup_mu));
    }
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        values[i] = -rho * std::log(rho / curve.mu_hat(grid[i]));
    }
    return DriftFunction(grid, std::move(values), DriftProvenance::FromMu, input.sigma2);
}

DriftFunction drift_from_pi(const BirthDeathDistribution& pi, const InputProcess& input,
                            const std::vector<double>& grid) {
    const int n_max = pi.n_max();
    if (n_max < 1) throw ValidationError("drift_from_pi needs pi on at least two states");
    std::vector<double> knots(static_cast<std::size_t>(n_max) + 1);
    std::vector<double> logpi(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        if (!(pi.pi[static_cast<std::size_t>(n)] > 0.0)) {
            throw ValidationError("drift_from_pi: pi(" + std::to_string(n) +
                                  ") is zero; log-interpolant undefined");
        }
        knots[static_cast<std::size_t>(n)] = n + 0.5;
        logpi[static_cast<std::size_t>(n)] = std::log(pi.pi[static_cast<std::size_t>(n)]);
    }
    const PchipInterpolant logf(std::move(knots), std::move(logpi));

    // Tail slope from detailed balance: log(pi(K)/pi(K-1)) = log(lambda*m/mu(K)).
    const int K = pi.K;
    const double tail_slope = std::log(pi.pi[static_cast<std::size_t>(K)] /
                                       pi.pi[static_cast<std::size_t>(K - 1)]);

    // The interpolant's derivative jumps at x = K (cubic below, detailed-balance
    // slope above). Pin K as an exact node so evaluation at the switch point
    // returns the tail value instead of a smeared average.
    std::vector<double> xs = grid;
    const double Kd = static_cast<double>(K);
    if (Kd > xs.front() && Kd < xs.back()) {
        const auto it = std::lower_bound(xs.begin(), xs.end(), Kd);
        if (std::abs(*it - Kd) > 1e-12) xs.insert(it, Kd);
        else *it = Kd;
    }

    const double rho = input.lambda * input.m;
    std::vector<double> values(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        const double slope = x >= Kd ? tail_slope : logf.derivative(x);
        values[i] = -rho * slope;
    }
    return DriftFunction(std::move(xs), std::move(values), DriftProvenance::FromPi,
                         input.sigma2);
}

} // namespace sdlps
