#pragma once

#include "sdlps/pchip.hpp"

#include <vector>

namespace sdlps {

/// Discrete service rates mu(1..I_max) of a state-dependent PS server plus a
/// continuous extension mu_hat on (0, I_max], constant beyond I_max.
///
/// Two construction routes: from the rate vector (shape-preserving cubic
/// through the integer knots, constant below 1 job and beyond I_max) or from
/// the closed form a - x^2/b, sampled at integers for the discrete side.
class ServiceRateCurve {
public:
    static ServiceRateCurve from_rates(std::vector<double> rates);

    /// mu_hat(x) = a - x^2/b on (0, I_max]; I_max is the last integer with a
    /// positive rate. The continuous branch follows the formula all the way
    /// down to x = 0.
    static ServiceRateCurve quadratic(double a, double b);

    double mu_hat(double x) const;

    /// mu(i) for integer i in 1..I_max (clamped at I_max above).
    double mu(int i) const;

    int max_level() const { return static_cast<int>(rates_.size()); }
    const std::vector<double>& rates() const { return rates_; }
    double max_rate() const;

private:
    ServiceRateCurve() = default;

    std::vector<double> rates_;
    PchipInterpolant interp_;
    bool use_formula_ = false;
    double a_ = 0.0;
    double b_ = 1.0;
};

inline ServiceRateCurve make_service_curve(std::vector<double> rates) {
    return ServiceRateCurve::from_rates(std::move(rates));
}

} // namespace sdlps
