#include "sdlps/service_curve.hpp"

#include "sdlps/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sdlps {

ServiceRateCurve ServiceRateCurve::from_rates(std::vector<double> rates) {
    if (rates.empty()) throw ValidationError("service curve needs at least one rate");
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (!(rates[i] > 0.0)) {
            throw ValidationError("service rate mu(" + std::to_string(i + 1) +
                                  ") must be > 0");
        }
    }
    ServiceRateCurve c;
    c.rates_ = std::move(rates);
    std::vector<double> x(c.rates_.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i + 1);
    c.interp_ = PchipInterpolant(std::move(x), c.rates_);
    return c;
}

ServiceRateCurve ServiceRateCurve::quadratic(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("quadratic curve needs a > 0, b > 0");
    ServiceRateCurve c;
    c.use_formula_ = true;
    c.a_ = a;
    c.b_ = b;
    for (int i = 1; a - i * i / b > 0.0; ++i) c.rates_.push_back(a - i * i / b);
    if (c.rates_.empty()) throw ValidationError("quadratic curve has no positive rate at i=1");
    return c;
}

double ServiceRateCurve::mu_hat(double x) const {
    const double i_max = static_cast<double>(rates_.size());
    if (use_formula_) {
        x = std::min(x, i_max);
        return a_ - x * x / b_;
    }
    if (x >= i_max) return rates_.back();
    if (x <= 1.0) return rates_.front(); // constant below one job
    return interp_(x);
}

double ServiceRateCurve::mu(int i) const {
    if (i < 1) throw ValidationError("mu(i) requires i >= 1");
    const int idx = std::min<int>(i, static_cast<int>(rates_.size()));
    return rates_[static_cast<std::size_t>(idx - 1)];
}

double ServiceRateCurve::max_rate() const {
    return *std::max_element(rates_.begin(), rates_.end());
}

} // namespace sdlps
