#pragma once

#include <cstdint>
#include <vector>

namespace sdlps {

/// 95% half-width from batch means (Student-t on the batch-mean stddev).
double batch_means_ci_halfwidth(const std::vector<double>& batch_means);

/// Two-sided 97.5% Student-t quantile.
double t_quantile_975(int dof);

/// Upper regularized incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// Chi-square survival probability P{X2_dof > stat}.
double chi_square_pvalue(double stat, int dof);

/// Pearson goodness-of-fit of observed counts against expected probabilities.
/// Low-expectation cells (below min_expected) are pooled into the tail.
double chi_square_gof_pvalue(const std::vector<std::uint64_t>& counts,
                             const std::vector<double>& probs, double min_expected = 5.0);

} // namespace sdlps
