#pragma once

#include "sdlps/birth_death.hpp"
#include "sdlps/drift.hpp"
#include "sdlps/input_process.hpp"

#include <functional>
#include <vector>

namespace sdlps {

/// Grid-tabulated stationary law on [0, W_max].
///
/// The density is stored in log space; cell masses and partial-cell CDF
/// queries integrate exp of the chordal log-density, which is exact for
/// exponential tails and keeps CDF error far below the grid spacing squared.
struct StationaryLaw {
    std::vector<double> grid;
    std::vector<double> log_pdf; // log of the *normalized* density
    std::vector<double> pdf;
    std::vector<double> cdf;
    double alpha = 1.0; // normalizer applied to the raw density
    double w_max = 0.0;

    double cdf_at(double w) const;
    double mean() const;
};

/// Stationary law of a reflected one-dimensional diffusion with
/// state-dependent drift -beta(.) and variance s(.):
///   p(u)  proportional to  (1/s(u)) exp(-int_0^u 2 beta(v)/s(v) dv).
StationaryLaw rbm_stationary(const std::function<double(double)>& beta,
                             const std::function<double(double)>& s, double w_max,
                             const std::vector<double>& grid);

inline StationaryLaw rbm_stationary(const std::function<double(double)>& beta,
                                    const std::function<double(double)>& s, double w_max,
                                    std::size_t grid_points = 4096) {
    return rbm_stationary(beta, s, w_max,
                          make_uniform_grid(0.0, w_max, grid_points));
}

/// Workload CDF of the static-K Sd-LPS diffusion limit, built from the
/// interpolated density of the M/M birth-death law raised to the exponent
/// (cs^2+1)/(cs^2+ca^2), with a log-linear tail beyond K.
StationaryLaw static_workload_cdf(const BirthDeathDistribution& pi, const InputProcess& input,
                                  int K, std::size_t grid_points = 4096);

/// Pushforward of the workload law through the state-space-collapse map.
StationaryLaw static_numjobs_cdf(const StationaryLaw& workload_law, const InputProcess& input,
                                 int K);

/// Mean-headcount approximation: discrete sums of pi(n)^exponent, used
/// verbatim (no interpolation enters).
double static_mean_numjobs(const BirthDeathDistribution& pi, const InputProcess& input, int K);

/// Companion mean-workload approximation with the same discrete weights.
double static_mean_workload(const BirthDeathDistribution& pi, const InputProcess& input, int K);

struct StaticApproxReport {
    int K = 1;
    double E_N = 0.0;
    double E_W = 0.0;
    double exponent = 1.0;
    StationaryLaw workload_cdf;
    StationaryLaw numjobs_cdf;
};

StaticApproxReport static_approx_report(const ServiceRateCurve& curve, const InputProcess& input,
                                        int K, double tail_tol = 1e-12,
                                        std::size_t grid_points = 4096);

} // namespace sdlps
