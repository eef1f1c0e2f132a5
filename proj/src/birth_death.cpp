#include "sdlps/birth_death.hpp"

#include "sdlps/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sdlps {

BirthDeathDistribution birth_death_pi(const ServiceRateCurve& curve, const InputProcess& input,
                                      int K, double tail_tol) {
    if (K < 1) throw ValidationError("concurrency level K must be >= 1");
    if (!(tail_tol > 0.0)) throw ValidationError("tail_tol must be > 0");

    const double rho = input.lambda * input.m; // offered load, work per time
    const double mu_K = curve.mu(K);
    if (rho >= mu_K) {
        throw InstabilityError("unstable: lambda*m = " + std::to_string(rho) +
                               " >= mu(K) = " + std::to_string(mu_K));
    }

    const double tail_ratio = rho / mu_K; // exact ratio for n >= K
    std::vector<double> pi;
    pi.push_back(1.0);
    double sum = 1.0;
    // Beyond K the ratio is constant, so the dropped tail is exactly
    // geometric: pi(N) * tail_ratio / (1 - tail_ratio).
    for (int n = 0;; ++n) {
        const double ratio = rho / curve.mu(std::min(n + 1, K));
        pi.push_back(pi.back() * ratio);
        sum += pi.back();
        if (n + 1 >= K) {
            const double tail = pi.back() * tail_ratio / (1.0 - tail_ratio);
            if (tail < tail_tol * sum) break;
        }
        if (pi.size() > 20'000'000) {
            throw NumericalError("birth_death_pi: truncation did not converge");
        }
    }

    BirthDeathDistribution out;
    out.K = K;
    out.truncation_mass = pi.back() * tail_ratio / (1.0 - tail_ratio) / sum;
    for (double& p : pi) p /= sum;
    out.pi = std::move(pi);
    return out;
}

} // namespace sdlps
