#include "sdlps/stats.hpp"

#include <algorithm>
#include <cmath>

namespace sdlps {

double t_quantile_975(int dof) {
    static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365,
                                   2.306,  2.262, 2.228, 2.201, 2.179, 2.160, 2.145,
                                   2.131,  2.120, 2.110, 2.101, 2.093, 2.086, 2.080,
                                   2.074,  2.069, 2.064, 2.060, 2.056, 2.052, 2.048,
                                   2.045,  2.042, 2.040, 2.037};
    if (dof < 1) return table[0];
    if (dof <= 32) return table[dof - 1];
    if (dof <= 40) return 2.021;
    if (dof <= 60) return 2.000;
    if (dof <= 120) return 1.980;
    return 1.960;
}

double batch_means_ci_halfwidth(const std::vector<double>& batch_means) {
    const std::size_t n = batch_means.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double b : batch_means) mean += b;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double b : batch_means) ss += (b - mean) * (b - mean);
    const double var = ss / static_cast<double>(n - 1);
    return t_quantile_975(static_cast<int>(n) - 1) *
           std::sqrt(var / static_cast<double>(n));
}

namespace {

// Lower regularized incomplete gamma by series; upper by continued fraction.
// Standard Numerical-Recipes-style split at x = a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 1000; ++k) {
        term *= x / (a + k);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace

double gamma_q(double a, double x) {
    if (x <= 0.0) return 1.0;
    if (a <= 0.0) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_contfrac(a, x);
}

double chi_square_pvalue(double stat, int dof) {
    if (dof < 1) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * stat);
}

double chi_square_gof_pvalue(const std::vector<std::uint64_t>& counts,
                             const std::vector<double>& probs, double min_expected) {
    double total = 0.0;
    for (std::uint64_t c : counts) total += static_cast<double>(c);
    if (total <= 0.0) return 1.0;

    const std::size_t n = std::max(counts.size(), probs.size());
    auto count_at = [&](std::size_t i) {
        return i < counts.size() ? static_cast<double>(counts[i]) : 0.0;
    };
    auto prob_at = [&](std::size_t i) { return i < probs.size() ? probs[i] : 0.0; };

    double stat = 0.0;
    int cells = 0;
    double pool_obs = 0.0, pool_exp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double expct = total * prob_at(i);
        if (expct < min_expected || pool_exp > 0.0) {
            // Pool the sparse tail (everything from the first sparse cell on).
            pool_obs += count_at(i);
            pool_exp += expct;
            continue;
        }
        stat += (count_at(i) - expct) * (count_at(i) - expct) / expct;
        ++cells;
    }
    // Residual tail probability beyond the tabulated support.
    double prob_sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) prob_sum += probs[i];
    pool_exp += total * std::max(0.0, 1.0 - prob_sum);
    if (pool_exp > 0.0) {
        stat += (pool_obs - pool_exp) * (pool_obs - pool_exp) / pool_exp;
        ++cells;
    }
    return chi_square_pvalue(stat, cells - 1);
}

} // namespace sdlps
