#include "sdlps/rbm_analytics.hpp"

#include "sdlps/errors.hpp"
#include "sdlps/pchip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdlps {

namespace {

// Mass of one grid cell, integrating exp of the chord of the log-density.
double cell_mass(double h, double lp0, double lp1) {
    const double db = lp1 - lp0;
    if (std::abs(db) < 1e-10) {
        return 0.5 * h * (std::exp(lp0) + std::exp(lp1));
    }
    return h * (std::exp(lp1) - std::exp(lp0)) / db;
}

// int u * exp(chord) du over [u0, u1], same convention as cell_mass.
double cell_first_moment(double u0, double u1, double lp0, double lp1) {
    const double h = u1 - u0;
    const double db = lp1 - lp0;
    if (std::abs(db) < 1e-10) {
        return 0.5 * h * (u0 * std::exp(lp0) + u1 * std::exp(lp1));
    }
    const double b = db / h;
    const double p0 = std::exp(lp0), p1 = std::exp(lp1);
    return (p1 * (u1 / b - 1.0 / (b * b)) - p0 * (u0 / b - 1.0 / (b * b)));
}

StationaryLaw law_from_log_density(std::vector<double> grid, std::vector<double> log_raw,
                                   bool check_tail) {
    const std::size_t n = grid.size();
    if (n < 2 || log_raw.size() != n) throw ValidationError("law grid/density size mismatch");

    const double shift = *std::max_element(log_raw.begin(), log_raw.end());
    for (double& v : log_raw) v -= shift;

    std::vector<double> cdf(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        cdf[i] = cdf[i - 1] + cell_mass(grid[i] - grid[i - 1], log_raw[i - 1], log_raw[i]);
    }
    const double total = cdf.back();
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw NumericalError("stationary density integrated to a non-positive mass");
    }

    if (check_tail) {
        const double h_last = grid[n - 1] - grid[n - 2];
        const double slope = (log_raw[n - 1] - log_raw[n - 2]) / h_last;
        const double tail = slope < 0.0 ? std::exp(log_raw[n - 1]) / (-slope)
                                        : std::numeric_limits<double>::infinity();
        if (!(tail <= 1e-9 * total)) {
            throw NumericalError("stationary density not integrated out at W_max; "
                                 "increase W_max");
        }
    }

    StationaryLaw law;
    law.w_max = grid.back();
    law.grid = std::move(grid);
    law.alpha = std::exp(-shift) / total;
    const double log_total = std::log(total);
    law.log_pdf.resize(n);
    law.pdf.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        law.log_pdf[i] = log_raw[i] - log_total;
        law.pdf[i] = std::exp(law.log_pdf[i]);
        cdf[i] /= total;
    }
    law.cdf = std::move(cdf);
    return law;
}

} // namespace

double StationaryLaw::cdf_at(double w) const {
    if (w <= grid.front()) return 0.0;
    if (w >= grid.back()) return 1.0;
    const auto it = std::upper_bound(grid.begin(), grid.end(), w);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
    const double h = grid[i + 1] - grid[i];
    const double t = (w - grid[i]) / h;
    const double lp_w = log_pdf[i] + t * (log_pdf[i + 1] - log_pdf[i]);
    const double partial = cell_mass(w - grid[i], log_pdf[i], lp_w);
    return std::min(1.0, cdf[i] + partial);
}

double StationaryLaw::mean() const {
    double m = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        m += cell_first_moment(grid[i - 1], grid[i], log_pdf[i - 1], log_pdf[i]);
    }
    return m;
}

StationaryLaw rbm_stationary(const std::function<double(double)>& beta,
                             const std::function<double(double)>& s, double w_max,
                             const std::vector<double>& grid) {
    const std::size_t n = grid.size();
    if (n < 2) throw ValidationError("rbm_stationary needs a grid with >= 2 points");
    if (grid.front() != 0.0 || std::abs(grid.back() - w_max) > 1e-12 * (1.0 + w_max)) {
        throw ValidationError("rbm_stationary grid must span [0, W_max]");
    }

    std::vector<double> q(n); // 2 beta / s
    for (std::size_t i = 0; i < n; ++i) {
        const double sv = s(grid[i]);
        if (!(sv > 0.0)) throw ValidationError("variance s(.) must be > 0 on [0, W_max]");
        q[i] = 2.0 * beta(grid[i]) / sv;
    }
    std::vector<double> log_raw(n);
    log_raw[0] = -std::log(s(grid[0]));
    double phi = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        phi += 0.5 * (grid[i] - grid[i - 1]) * (q[i] + q[i - 1]);
        log_raw[i] = -std::log(s(grid[i])) - phi;
    }
    return law_from_log_density(grid, std::move(log_raw), /*check_tail=*/true);
}

namespace {

// Interpolated log-density of the birth-death law: shape-preserving cubic
// through (n + 1/2, log pi(n)), log-linear with the detailed-balance slope
// beyond K.
struct LogF {
    PchipInterpolant interp;
    double K;
    double value_at_K;
    double tail_slope;

    double operator()(double x) const {
        if (x >= K) return value_at_K + tail_slope * (x - K);
        return interp(x);
    }
};

LogF make_log_f(const BirthDeathDistribution& pi) {
    const int n_max = pi.n_max();
    if (n_max < 1) throw ValidationError("need pi on at least two states");
    std::vector<double> knots, logpi;
    knots.reserve(static_cast<std::size_t>(n_max) + 1);
    logpi.reserve(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        const double p = pi.pi[static_cast<std::size_t>(n)];
        if (!(p > 0.0)) throw ValidationError("pi has zero mass; log-interpolant undefined");
        knots.push_back(n + 0.5);
        logpi.push_back(std::log(p));
    }
    LogF f{PchipInterpolant(std::move(knots), std::move(logpi)), static_cast<double>(pi.K),
           0.0, 0.0};
    f.tail_slope = std::log(pi.pi[static_cast<std::size_t>(pi.K)] /
                            pi.pi[static_cast<std::size_t>(pi.K - 1)]);
    f.value_at_K = f.interp(f.K);
    return f;
}

// Uniform-ish grid over [0, w_max] that contains `knot` exactly.
std::vector<double> grid_with_knot(double w_max, double knot, std::size_t points) {
    if (!(knot > 0.0) || knot >= w_max) return make_uniform_grid(0.0, w_max, points);
    const std::size_t n1 = std::max<std::size_t>(
        2, static_cast<std::size_t>(static_cast<double>(points) * knot / w_max));
    const std::size_t n2 = points > n1 + 2 ? points - n1 : 2;
    auto g = make_uniform_grid(0.0, knot, n1 + 1);
    auto g2 = make_uniform_grid(knot, w_max, n2);
    g.insert(g.end(), g2.begin() + 1, g2.end());
    return g;
}

} // namespace

StationaryLaw static_workload_cdf(const BirthDeathDistribution& pi, const InputProcess& input,
                                  int K, std::size_t grid_points) {
    const LogF logf = make_log_f(pi);
    const double e = input.cdf_exponent();
    // The workload law integrates f(w / m_e) on [0, w / m_e], so its support
    // runs to m_e * n_max (not the Delta-inverse image of n_max).
    const double w_max = input.m_e * static_cast<double>(pi.n_max());
    auto grid = grid_with_knot(w_max, K * input.m_e, grid_points);
    std::vector<double> log_raw(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        log_raw[i] = e * logf(grid[i] / input.m_e);
    }
    return law_from_log_density(std::move(grid), std::move(log_raw), /*check_tail=*/false);
}

StationaryLaw static_numjobs_cdf(const StationaryLaw& workload_law, const InputProcess& input,
                                 int K) {
    StationaryLaw law;
    const std::size_t n = workload_law.grid.size();
    law.grid.resize(n);
    law.log_pdf.resize(n);
    law.pdf.resize(n);
    law.cdf = workload_law.cdf;
    law.alpha = workload_law.alpha;
    const double knee = K * input.m_e;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = workload_law.grid[i];
        law.grid[i] = delta_map(w, K, input);
        const double jac = w < knee ? input.m_e : input.m; // dw/dx on each branch
        law.log_pdf[i] = workload_law.log_pdf[i] + std::log(jac);
        law.pdf[i] = std::exp(law.log_pdf[i]);
    }
    law.w_max = law.grid.back();
    return law;
}

namespace {

struct DiscreteSums {
    double served = 0.0;  // sum (n ^ K) pi^e
    double queued = 0.0;  // sum (n - K)+ pi^e
    double den = 0.0;     // sum pi^e
};

DiscreteSums discrete_moment_sums(const BirthDeathDistribution& pi, double e, int K) {
    DiscreteSums s;
    for (int n = 0; n <= pi.n_max(); ++n) {
        const double w = std::pow(pi.pi[static_cast<std::size_t>(n)], e);
        s.den += w;
        s.served += std::min(n, K) * w;
        s.queued += std::max(n - K, 0) * w;
    }
    return s;
}

} // namespace

double static_mean_numjobs(const BirthDeathDistribution& pi, const InputProcess& input, int K) {
    const auto s = discrete_moment_sums(pi, input.cdf_exponent(), K);
    return (s.served + 0.5 * (input.cs2 + 1.0) * s.queued) / s.den;
}

double static_mean_workload(const BirthDeathDistribution& pi, const InputProcess& input, int K) {
    // P{W <= w} = alpha int_0^{w/m_e} f^e, so E[W] = m_e E[x] under the f^e law.
    const auto s = discrete_moment_sums(pi, input.cdf_exponent(), K);
    return input.m_e * (s.served + s.queued) / s.den;
}

StaticApproxReport static_approx_report(const ServiceRateCurve& curve, const InputProcess& input,
                                        int K, double tail_tol, std::size_t grid_points) {
    const auto pi = birth_death_pi(curve, input, K, tail_tol);
    StaticApproxReport r;
    r.K = K;
    r.exponent = input.cdf_exponent();
    r.E_N = static_mean_numjobs(pi, input, K);
    r.E_W = static_mean_workload(pi, input, K);
    r.workload_cdf = static_workload_cdf(pi, input, K, grid_points);
    r.numjobs_cdf = static_numjobs_cdf(r.workload_cdf, input, K);
    return r;
}

} // namespace sdlps
