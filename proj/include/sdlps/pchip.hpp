#pragma once

#include <vector>

namespace sdlps {

/// Shape-preserving monotone piecewise-cubic interpolant (Fritsch-Carlson).
///
/// Interpolates exactly at the knots and never overshoots locally monotone
/// data, so it introduces no spurious extrema between knots. C1 on the knot
/// range; evaluation outside the knot range extrapolates linearly with the
/// endpoint slope.
class PchipInterpolant {
public:
    PchipInterpolant() = default;
    PchipInterpolant(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double derivative(double x) const;

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    std::size_t size() const { return x_.size(); }

private:
    std::size_t segment(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> slope_; // Hermite slope at each knot
};

} // namespace sdlps
