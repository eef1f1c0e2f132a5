#include <doctest.h>

#include "sdlps/birth_death.hpp"
#include "sdlps/drift.hpp"
#include "sdlps/errors.hpp"
#include "sdlps/rbm_analytics.hpp"
#include "sdlps/service_curve.hpp"

#include <cmath>

using namespace sdlps;

namespace {

InputProcess make_in(double lambda, double ca2, double cs2, double m = 1.0) {
    const DistFamily size_fam =
        cs2 >= 1.0 ? DistFamily::DegenerateHyperexponential : DistFamily::Erlang;
    return InputProcess::make(lambda, DistFamily::Exponential, ca2, size_fam, m, cs2);
}

} // namespace

TEST_CASE("rbm stationary: constant coefficients give the exponential law") {
    const double theta = 0.25, sigma2 = 2.0;
    const auto law = rbm_stationary([&](double) { return theta; },
                                    [&](double) { return sigma2; }, 120.0, 4096);
    CHECK(law.cdf_at(4.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-7));
    double sup = 0.0;
    for (double u : law.grid) {
        sup = std::max(sup, std::abs(law.cdf_at(u) -
                                     (1.0 - std::exp(-2.0 * theta / sigma2 * u))));
    }
    CHECK(sup <= 1e-8);
    CHECK(law.mean() == doctest::Approx(sigma2 / (2.0 * theta)).epsilon(1e-8));
}

TEST_CASE("rbm stationary: linear drift gives the half-normal law") {
    const auto law = rbm_stationary([](double w) { return w; }, [](double) { return 1.0; },
                                    8.0, 4096);
    CHECK(law.cdf_at(1.0) == doctest::Approx(std::erf(1.0)).epsilon(1e-6));
    CHECK(law.cdf_at(0.5) == doctest::Approx(std::erf(0.5)).epsilon(1e-6));
}

TEST_CASE("rbm stationary: normalization and monotonicity") {
    const auto law = rbm_stationary([](double w) { return 0.1 + 0.3 * w; },
                                    [](double w) { return 1.0 + 0.5 * w; }, 40.0, 2048);
    CHECK(law.cdf.front() == 0.0);
    CHECK(law.cdf.back() == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 1; i < law.cdf.size(); ++i) {
        CHECK(law.cdf[i] >= law.cdf[i - 1]);
        CHECK(law.pdf[i] >= 0.0);
    }
}

TEST_CASE("rbm stationary: non-integrable density rejected") {
    CHECK_THROWS_AS(rbm_stationary([](double) { return -0.5; }, // outward drift
                                   [](double) { return 1.0; }, 50.0, 1024),
                    NumericalError);
}

TEST_CASE("static workload cdf: exponent-1 cell masses track pi") {
    SUBCASE("M/M/1: geometric pi reproduced near-exactly") {
        const auto curve = make_service_curve({1.0});
        const auto input = make_in(0.5, 1.0, 1.0);
        const auto pi = birth_death_pi(curve, input, 1);
        const auto law = static_workload_cdf(pi, input, 1);
        CHECK(law.cdf_at(0.0) == 0.0);
        for (int n = 0; n <= 8; ++n) {
            const double mass = law.cdf_at((n + 1) * input.m) - law.cdf_at(n * input.m);
            CHECK(mass == doctest::Approx(pi.pi[n]).epsilon(0.02));
        }
    }
    SUBCASE("state-dependent rates: within interpolation error") {
        const auto curve = make_service_curve({1.0, 1.5, 1.25, 1.0, 0.75});
        const auto input = make_in(0.9, 1.0, 1.0);
        const auto pi = birth_death_pi(curve, input, 2);
        const auto law = static_workload_cdf(pi, input, 2);
        CHECK(law.cdf_at(0.0) == 0.0);
        for (int n = 0; n <= 6; ++n) {
            const double mass = law.cdf_at((n + 1) * input.m) - law.cdf_at(n * input.m);
            CHECK(mass == doctest::Approx(pi.pi[n]).epsilon(0.05));
        }
    }
}

TEST_CASE("static numjobs cdf: pushforward branches and monotonicity") {
    const auto curve = ServiceRateCurve::quadratic(1.25, 150.0);
    const auto input = make_in(0.8, 1.0, 4.0);
    const int K = 5;
    const auto pi = birth_death_pi(curve, input, K);
    const auto wlaw = static_workload_cdf(pi, input, K);
    const auto nlaw = static_numjobs_cdf(wlaw, input, K);
    for (double x : {0.5, 2.0, 4.9}) {
        CHECK(nlaw.cdf_at(x) == doctest::Approx(wlaw.cdf_at(x * input.m_e)).epsilon(1e-9));
    }
    for (double x : {6.0, 9.0, 15.0}) {
        CHECK(nlaw.cdf_at(x) ==
              doctest::Approx(wlaw.cdf_at(K * input.m_e + (x - K) * input.m)).epsilon(1e-9));
    }
    double prev = 0.0;
    for (double x = 0.0; x < 20.0; x += 0.05) {
        const double c = nlaw.cdf_at(x);
        CHECK(c >= prev - 1e-12);
        CHECK(c <= 1.0 + 1e-12);
        prev = c;
    }
}

TEST_CASE("static mean numjobs: exponent-1 collapse to the birth-death mean") {
    SUBCASE("M/M/1 at rho one half") {
        const auto curve = make_service_curve({1.0});
        const auto input = make_in(0.5, 1.0, 1.0);
        const auto pi = birth_death_pi(curve, input, 1);
        CHECK(static_mean_numjobs(pi, input, 1) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("reference rates across stable K") {
        const auto curve = make_service_curve({1.0, 1.5, 1.25, 1.0, 0.75});
        const auto input = make_in(0.9, 1.0, 1.0);
        for (int K = 1; K <= 4; ++K) {
            const auto pi = birth_death_pi(curve, input, K);
            CHECK(static_mean_numjobs(pi, input, K) ==
                  doctest::Approx(pi.mean()).epsilon(1e-9));
        }
    }
}

TEST_CASE("static mean numjobs: vanishing load") {
    const auto curve = make_service_curve({1.0});
    const auto input = make_in(1e-6, 1.0, 1.0);
    const auto pi = birth_death_pi(curve, input, 1);
    CHECK(static_mean_numjobs(pi, input, 1) <= 1e-5);
}

TEST_CASE("static report: cdf-mean agrees with the discrete mean") {
    // Continuous-vs-discrete mean agreement is a heavy-traffic statement: the
    // half-cell offset between sums over pi and integrals over f is O(1), so
    // the relative gap closes only as E[N] grows. Use a near-critical load.
    const auto curve = ServiceRateCurve::quadratic(1.25, 150.0);
    const auto input = make_in(1.05, 1.0, 4.0);
    const auto report = static_approx_report(curve, input, 5);
    CHECK(report.exponent == doctest::Approx(1.0));
    CHECK(report.E_N >= 0.0);
    CHECK(report.numjobs_cdf.mean() == doctest::Approx(report.E_N).epsilon(0.02));
    // consistency through the collapse map
    for (double x : {1.0, 3.0, 7.0}) {
        CHECK(report.numjobs_cdf.cdf_at(x) ==
              doctest::Approx(report.workload_cdf.cdf_at(delta_inverse(x, 5, input)))
                  .epsilon(1e-9));
    }
}

TEST_CASE("RBM law vs closed-form workload law on the quadratic instance") {
    const auto curve = ServiceRateCurve::quadratic(1.25, 150.0);
    const auto input = make_in(0.8, 1.0, 19.0);
    const int K = 5;
    const auto pi = birth_death_pi(curve, input, K);
    const auto closed_form = static_workload_cdf(pi, input, K);

    const auto drift = drift_from_pi(pi, input, make_uniform_grid(0.0, 3.0 * K, 8192));
    const double knee = K * input.m_e;
    auto grid = make_uniform_grid(0.0, knee, 2048);
    const auto tail_grid = make_uniform_grid(knee, closed_form.w_max, 8192);
    grid.insert(grid.end(), tail_grid.begin() + 1, tail_grid.end());
    const auto rbm_law = rbm_stationary(
        [&](double w) { return drift(std::min(delta_map(w, K, input), double(K))); },
        [&](double) { return input.sigma2; }, closed_form.w_max, grid);

    double sup = 0.0;
    for (double w = 0.0; w <= closed_form.w_max; w += closed_form.w_max / 500.0) {
        sup = std::max(sup, std::abs(closed_form.cdf_at(w) - rbm_law.cdf_at(w)));
    }
    CHECK(sup <= 1e-3);
}
