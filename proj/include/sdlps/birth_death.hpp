#pragma once

#include "sdlps/input_process.hpp"
#include "sdlps/service_curve.hpp"

#include <vector>

namespace sdlps {

/// Exact stationary headcount distribution of the Sd-LPS queue with static
/// concurrency level K under M/M input.
struct BirthDeathDistribution {
    std::vector<double> pi; // pi[0..N_max], normalized
    int K = 1;
    double truncation_mass = 0.0; // geometric tail bound dropped before renormalizing

    int n_max() const { return static_cast<int>(pi.size()) - 1; }
    double mean() const {
        double s = 0.0;
        for (std::size_t n = 0; n < pi.size(); ++n) s += static_cast<double>(n) * pi[n];
        return s;
    }
};

/// Ratio recursion pi(n+1) = pi(n) * lambda*m / mu((n+1) ^ K), truncated where
/// the geometric tail bound (ratio lambda*m/mu(K)) drops below tail_tol.
BirthDeathDistribution birth_death_pi(const ServiceRateCurve& curve, const InputProcess& input,
                                      int K, double tail_tol = 1e-12);

} // namespace sdlps
