#include <doctest.h>

#include "sdlps/control.hpp"
#include "sdlps/drift.hpp"
#include "sdlps/errors.hpp"
#include "sdlps/service_curve.hpp"

#include <cmath>
#include <sstream>

using namespace sdlps;

namespace {

InputProcess make_in(double lambda, double ca2, double cs2, double m = 1.0) {
    const DistFamily size_fam =
        cs2 >= 1.0 ? DistFamily::DegenerateHyperexponential : DistFamily::Erlang;
    return InputProcess::make(lambda, DistFamily::Exponential, ca2, size_fam, m, cs2);
}

// Constant-drift instance with a closed-form optimal cost: theta = 0.4,
// sigma^2 = 4, m = 1, cs2 = 4 (m_e = 2.5). The optimal policy serves
// everything (k = w/m_e), the workload is an RBM with mean sigma^2/(2 theta),
// and v* = sigma^2 / (2 theta m_e) = 2.
struct ConstantThetaInstance {
    InputProcess input = make_in(0.8, 1.0, 4.0);
    DriftFunction drift{{0.0, 200.0}, {0.4, 0.4}, DriftProvenance::FromMu, 4.0};
    double v_star = 2.0;
};

SolverOptions fast_opts() {
    SolverOptions o;
    o.rtol = 1e-7;
    o.atol = 1e-9;
    o.k_grid = 128;
    o.grid_points = 512;
    return o;
}

} // namespace

TEST_CASE("inner argmin: closed-form cases") {
    SUBCASE("constant theta, m_e > m: serve everything") {
        ConstantThetaInstance c;
        CHECK(inner_argmin(5.0, 1.0, c.drift, c.input) == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(inner_argmin(10.0, -3.0, c.drift, c.input) ==
              doctest::Approx(4.0).epsilon(1e-9));
    }
    SUBCASE("constant theta, m_e < m: serve one at a time") {
        const auto input = make_in(0.8, 1.0, 0.5);
        const DriftFunction drift({0.0, 100.0}, {0.3, 0.3}, DriftProvenance::FromMu,
                                  input.sigma2);
        CHECK(inner_argmin(6.0, 1.0, drift, input) == doctest::Approx(0.0));
    }
    SUBCASE("cs2 = 1: sign of G picks max or min drift") {
        const auto input = make_in(0.5, 1.0, 1.0);
        const DriftFunction drift({0.0, 10.0}, {0.0, 1.0}, DriftProvenance::FromMu,
                                  input.sigma2);
        // G > 0: minimize -theta(k) G, i.e. maximize theta -> k = w/m_e
        CHECK(inner_argmin(4.0, 2.0, drift, input) == doctest::Approx(4.0).epsilon(1e-9));
        // G < 0: minimize theta(k) |G| -> k = 0
        CHECK(inner_argmin(4.0, -2.0, drift, input) == doctest::Approx(0.0));
    }
}

TEST_CASE("fluid policy: argmax of the drift below the knee") {
    const auto input = make_in(0.5, 1.0, 1.0);
    const DriftFunction drift({0.0, 2.0, 10.0}, {0.0, 1.0, 0.2}, DriftProvenance::FromMu,
                              input.sigma2);
    CHECK(drift.k_hat() == doctest::Approx(2.0));
    CHECK(fluid_policy(1.0, drift, input) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fluid_policy(5.0, drift, input) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fluid_policy(100.0, drift, input) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("fluid continuation: affine in v, zero cost at the fluid optimum") {
    const auto curve = ServiceRateCurve::quadratic(1.25, 150.0);
    const auto input = make_in(0.8, 1.0, 4.0);
    const auto drift = drift_from_mu(curve, input, make_uniform_grid(0.0, 13.0, 1024));
    const FluidContinuation fc(drift, input);

    for (double w : {0.0, 1.0, 5.0, 20.0, 80.0}) {
        const double g1 = fc.value(1.0, w);
        const double g2 = fc.value(2.0, w);
        const double g3 = fc.value(3.0, w);
        CHECK(g3 - g2 == doctest::Approx(g2 - g1).epsilon(1e-9)); // affine in v
    }
    const double vf = fc.v_fluid0();
    CHECK(fc.at_zero(vf) == doctest::Approx(0.0).scale(1.0));
    CHECK(fc.value(vf, 0.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(vf > 0.0);
}

TEST_CASE("fluid continuation: constant drift closed form") {
    ConstantThetaInstance c;
    const FluidContinuation fc(c.drift, c.input);
    // k_hat = 0, so Gbar_v is the closed-form line everywhere and the fluid
    // policy (admit nothing beyond the drift plateau) costs E[W]/m = 5.
    CHECK(fc.v_fluid0() == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(fc.value(5.0, 0.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(fc.value(5.0, 4.0) == doctest::Approx(4.0 / 0.4).epsilon(1e-9));
}

TEST_CASE("feasibility probe: outcomes bracket the optimal cost") {
    ConstantThetaInstance c;
    const auto hi = probe_average_cost(c.drift, c.input, c.v_star + 0.2, 1e-6);
    CHECK(hi.outcome != ForwardOutcome::WentNegative);
    const auto lo = probe_average_cost(c.drift, c.input, c.v_star - 0.2, 1e-6);
    CHECK(lo.outcome == ForwardOutcome::WentNegative);
}

TEST_CASE("forward integration: constant-theta closed form G*(w) = w") {
    ConstantThetaInstance c;
    const double G3 = integrate_G_forward(c.drift, c.input, c.v_star, 0.0, 3.0);
    CHECK(G3 == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("binary search: constant-theta oracle v* = 2") {
    ConstantThetaInstance c;
    auto policy = solve_binary_search(c.drift, c.input, 1e-4);
    CHECK(std::abs(policy.v - 2.0) <= 2e-4);
    CHECK(policy.provenance == SolveMethod::BinarySearch);
    CHECK(policy.eps == 1e-4);
    CHECK_FALSE(policy.trace.empty());
    // admissibility: 0 <= k(w) <= w/m_e
    for (std::size_t i = 0; i < policy.table.grid.size(); ++i) {
        CHECK(policy.table.k_of_w[i] >= 0.0);
        CHECK(policy.table.k_of_w[i] <=
              policy.table.grid[i] / c.input.m_e + 1e-9 * (1.0 + policy.table.grid[i]));
    }
}

TEST_CASE("newton with doubling: constant-theta oracle v* = 2") {
    ConstantThetaInstance c;
    const auto policy = solve_with_doubling(c.drift, c.input, 1e-4);
    CHECK(std::abs(policy.v - 2.0) <= 2e-4);
    CHECK(policy.provenance == SolveMethod::Newton);
    CHECK_FALSE(policy.table.g.empty());
    CHECK(policy.W >= 0.0);
}

TEST_CASE("newton iterates: monotone from above") {
    ConstantThetaInstance c;
    const auto policy = solve_newton(c.drift, c.input, 30.0, 1e-6);
    REQUIRE(policy.trace.size() >= 2);
    for (std::size_t i = 1; i < policy.trace.size(); ++i) {
        CHECK(policy.trace[i].v <= policy.trace[i - 1].v + 1e-12);
        // the certified cost is one Newton update past the last iterate, so
        // allow the update slack eps / |g(0)|
        CHECK(policy.trace[i].v >= policy.v - 1e-5);
    }
}

TEST_CASE("newton: doubling the continuation point never raises the cost") {
    ConstantThetaInstance c;
    const auto p1 = solve_newton(c.drift, c.input, 20.0, 1e-8);
    const auto p2 = solve_newton(c.drift, c.input, 40.0, 1e-8);
    CHECK(p2.v <= p1.v + 1e-7);
}

TEST_CASE("cs2 = 1: the fluid policy is optimal") {
    const auto curve = ServiceRateCurve::quadratic(1.25, 150.0);
    const auto input = make_in(0.8, 1.0, 1.0);
    const auto drift = drift_from_mu(curve, input, make_uniform_grid(0.0, 13.0, 1024));
    const FluidContinuation fc(drift, input);
    const auto policy = solve_with_doubling(drift, input, 1e-6, fast_opts());
    CHECK(policy.v == doctest::Approx(fc.v_fluid0()).epsilon(1e-4));
}

TEST_CASE("solver cross-agreement on the quadratic instance") {
    const auto curve = ServiceRateCurve::quadratic(1.25, 150.0);
    const auto input = make_in(0.8, 1.0, 4.0);
    const auto drift = drift_from_mu(curve, input, make_uniform_grid(0.0, 13.0, 1024));
    const double eps = 1e-4;
    const auto opts = fast_opts();
    const auto pb = solve_binary_search(drift, input, eps, opts);
    const auto pn = solve_with_doubling(drift, input, eps, opts);
    CHECK(std::abs(pb.v - pn.v) <= 2.0 * eps);
    CHECK(pb.v > 0.0);
    // tighter eps must not loosen the bracket: trace grows
    const auto pb2 = solve_binary_search(drift, input, eps / 8.0, opts);
    CHECK(pb2.trace.size() >= pb.trace.size() + 1);
    CHECK(std::abs(pb2.v - pn.v) <= 2.0 * eps);
}

TEST_CASE("discretize: round up, exact integers preserved, floored at zero") {
    DynamicPolicy policy;
    policy.table.grid = {0.0, 1.0, 2.0, 3.0, 4.0};
    policy.table.G = {0.0, 0.0, 0.0, 0.0, 0.0};
    policy.table.k_of_w = {0.0, 2.0000000001, 1.5, 0.4, 3.0};
    const auto table = discretize_policy(policy);
    REQUIRE(table.k.size() == 5);
    CHECK(table.k[0] == 0);
    CHECK(table.k[1] == 2); // fp noise above an integer does not bump it
    CHECK(table.k[2] == 2);
    CHECK(table.k[3] == 1); // any fractional request opens a slot
    CHECK(table.k[4] == 3);
    CHECK(policy.k_tilde.k == table.k);
}

TEST_CASE("policy save/load round trip") {
    ConstantThetaInstance c;
    auto policy = solve_binary_search(c.drift, c.input, 1e-3, fast_opts());
    policy.lambda = c.input.lambda;
    policy.m = c.input.m;
    policy.ca2 = c.input.ca2;
    policy.cs2 = c.input.cs2;
    policy.toolkit_version = "0.1.0";
    policy.config_digest = "deadbeef";
    discretize_policy(policy);

    std::stringstream ss;
    save_policy(policy, ss);
    const DynamicPolicy back = load_policy(ss);

    CHECK(back.v == policy.v);
    CHECK(back.W == policy.W);
    CHECK(back.eps == policy.eps);
    CHECK(back.provenance == policy.provenance);
    CHECK(back.drift_provenance == policy.drift_provenance);
    CHECK(back.lambda == policy.lambda);
    CHECK(back.cs2 == policy.cs2);
    CHECK(back.toolkit_version == policy.toolkit_version);
    CHECK(back.config_digest == policy.config_digest);
    REQUIRE(back.k_tilde.w_grid.size() == policy.k_tilde.w_grid.size());
    for (std::size_t i = 0; i < back.k_tilde.w_grid.size(); ++i) {
        CHECK(back.k_tilde.w_grid[i] == policy.k_tilde.w_grid[i]);
        CHECK(back.k_tilde.k[i] == policy.k_tilde.k[i]);
    }
}

TEST_CASE("policy load: malformed input rejected") {
    std::stringstream ss("not-a-policy 1\n");
    CHECK_THROWS_AS(load_policy(ss), ConfigError);
}
