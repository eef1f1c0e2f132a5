#pragma once

#include "sdlps/distributions.hpp"
#include "sdlps/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sdlps {

/// Renewal arrival stream + i.i.d. job sizes, with the derived quantities the
/// diffusion analysis needs everywhere: the equilibrium mean m_e and the
/// diffusion variance sigma^2 = lambda m^2 (ca^2 + cs^2).
struct InputProcess {
    double lambda = 1.0;
    Distribution interarrival = Distribution::make(DistFamily::Exponential, 1.0, 1.0);
    Distribution jobsize = Distribution::make(DistFamily::Exponential, 1.0, 1.0);

    double m = 1.0;
    double ca2 = 1.0;
    double cs2 = 1.0;
    double m_e = 1.0;
    double sigma2 = 2.0;

    static InputProcess make(double lambda, DistFamily arrival_family, double ca2,
                             DistFamily jobsize_family, double m, double cs2) {
        if (!(lambda > 0.0)) throw ValidationError("arrival rate lambda must be > 0");
        InputProcess in;
        in.lambda = lambda;
        in.interarrival = Distribution::make(arrival_family, 1.0 / lambda, ca2);
        in.jobsize = Distribution::make(jobsize_family, m, cs2);
        in.m = m;
        in.ca2 = ca2;
        in.cs2 = cs2;
        in.m_e = 0.5 * (1.0 + cs2) * m;
        in.sigma2 = lambda * m * m * (ca2 + cs2);
        return in;
    }

    /// Exponent of the stationary workload law and the discrete moment sums.
    double cdf_exponent() const { return (cs2 + 1.0) / (cs2 + ca2); }
};

/// State-space-collapse map: workload -> asymptotic headcount.
inline double delta_map(double w, double K, const InputProcess& in) {
    if (w < 0.0 || K < 0.0) throw ValidationError("delta_map requires w >= 0, K >= 0");
    const double wk = K * in.m_e;
    return std::min(w, wk) / in.m_e + std::max(w - wk, 0.0) / in.m;
}

/// Inverse map: headcount -> workload.
inline double delta_inverse(double x, double K, const InputProcess& in) {
    if (x < 0.0 || K < 0.0) throw ValidationError("delta_inverse requires x >= 0, K >= 0");
    return std::min(x, K) * in.m_e + std::max(x - K, 0.0) * in.m;
}

} // namespace sdlps
