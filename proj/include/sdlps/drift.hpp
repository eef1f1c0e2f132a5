#pragma once

#include "sdlps/birth_death.hpp"
#include "sdlps/input_process.hpp"
#include "sdlps/service_curve.hpp"

#include <vector>

namespace sdlps {

enum class DriftProvenance { FromMu, FromPi };

/// Heavy-traffic drift theta(x), tabulated on a grid with linear
/// interpolation and constant continuation outside the grid range.
class DriftFunction {
public:
    DriftFunction(std::vector<double> grid, std::vector<double> values,
                  DriftProvenance provenance, double sigma2);

    double operator()(double x) const {
        if (x <= grid_.front()) return values_.front();
        if (x >= grid_.back()) return values_.back();
        if (uniform_) {
            const double t = (x - grid_.front()) / step_;
            const std::size_t i = static_cast<std::size_t>(t);
            const double frac = t - static_cast<double>(i);
            return values_[i] + frac * (values_[i + 1] - values_[i]);
        }
        return eval_general(x);
    }

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    DriftProvenance provenance() const { return provenance_; }
    double sigma2() const { return sigma2_; }
    double k_hat() const { return k_hat_; }
    double theta_hat() const { return theta_hat_; }
    double d_theta() const { return d_theta_; }

private:
    double eval_general(double x) const;

    std::vector<double> grid_;
    std::vector<double> values_;
    DriftProvenance provenance_;
    double sigma2_;
    bool uniform_ = false;
    double step_ = 0.0;
    double k_hat_ = 0.0;
    double theta_hat_ = 0.0;
    double d_theta_ = 0.0;
};

std::vector<double> make_uniform_grid(double lo, double hi, std::size_t points);

/// theta(x) = -lambda*m * log(lambda*m / mu_hat(x)) on the given grid.
DriftFunction drift_from_mu(const ServiceRateCurve& curve, const InputProcess& input,
                            const std::vector<double>& grid);

/// theta(x) = -lambda*m * d/dx log f(x), with log f the shape-preserving
/// cubic through (n + 1/2, log pi(n)) and constant slope log(lambda*m/mu(K))
/// for x >= K.
DriftFunction drift_from_pi(const BirthDeathDistribution& pi, const InputProcess& input,
                            const std::vector<double>& grid);

} // namespace sdlps
