#pragma once

#include "sdlps/drift.hpp"
#include "sdlps/input_process.hpp"
#include "sdlps/policy.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace sdlps {

struct SolverOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    int k_grid = 512;               // inner argmin scan resolution
    std::size_t grid_points = 2048; // policy tabulation
    int max_cost_doublings = 60;    // binary search feasibility hunt
    int max_newton_iters = 60;
    int max_W_doublings = 20;
    // Optional Newton starting guess. NaN means "use the fluid-policy cost".
    // Any value above the optimal cost is a valid start (the iterates stay
    // monotone from above); useful for studying the convergence behaviour.
    double newton_v0 = std::numeric_limits<double>::quiet_NaN();
};

/// Value-function gradient G (and its cost-derivative g for Newton solves)
/// with the minimizing concurrency, tabulated on a workload grid.
struct ValueGradientTable {
    std::vector<double> grid;
    std::vector<double> G;
    std::vector<double> g; // empty for binary-search solves
    std::vector<double> k_of_w;
    double v = 0.0;
};

enum class SolveMethod { BinarySearch, Newton };

struct NewtonIterate {
    double v = 0.0;
    double G0 = 0.0;
    double g0 = 0.0;
};

struct DynamicPolicy {
    ValueGradientTable table;
    IntPolicyTable k_tilde;
    double v = 0.0;   // certified average cost
    double W = 0.0;   // fluid continuation point
    double eps = 0.0;
    SolveMethod provenance = SolveMethod::BinarySearch;
    DriftProvenance drift_provenance = DriftProvenance::FromMu;
    double lambda = 0.0, m = 0.0, ca2 = 0.0, cs2 = 0.0;
    std::string toolkit_version; // provenance stamps for saved policies
    std::string config_digest;
    std::vector<NewtonIterate> trace; // per-iterate solver progress
};

/// k*(w) = argmin over k in [0, w/m_e] of k(1 - m_e/m) - theta(k) G_val.
/// Dense scan plus golden-section polish; ties break toward smaller k.
double inner_argmin(double w, double G_val, const DriftFunction& drift,
                    const InputProcess& input, double* objective = nullptr,
                    int k_grid = 512);

/// Most efficient admissible concurrency, k_f(w) = argmax over x <= w/m_e of
/// theta(x); equals k_hat once w >= k_hat * m_e.
double fluid_policy(double w, const DriftFunction& drift, const InputProcess& input);

/// Fluid continuation of the value-function gradient, Gbar_v(w). The ODE is
/// linear so Gbar_v(w) = A(w) + B(w) v; A and B are integrated once on
/// [0, k_hat m_e] and the closed-form linear branch takes over beyond.
class FluidContinuation {
public:
    FluidContinuation(const DriftFunction& drift, const InputProcess& input,
                      const SolverOptions& opts = {});

    double value(double v, double w) const; // Gbar_v(w)
    double at_zero(double v) const { return A0_ + B0_ * v; }
    double v_fluid0() const { return -A0_ / B0_; } // cost of the fluid policy

private:
    double knee_ = 0.0; // k_hat * m_e
    double theta_hat_ = 0.0;
    double line_slope_ = 0.0; // closed-form branch: slope_w * w + c0 + c1 * v
    double line_c0_ = 0.0;
    double line_c1_ = 0.0;
    double A0_ = 0.0, B0_ = 0.0;
    // Hermite knots of A, B on [0, knee]
    std::vector<double> w_, A_, dA_, B_, dB_;
};

/// Feasibility probe behind the binary-search solver: forward-evolve G_v from G_v(0) = 0
/// until it meets Gbar_v (feasible), dips below -eps (infeasible), or reaches
/// the workload cap (treated feasible; v is within resolution of optimal).
enum class ForwardOutcome { HitBarrier, WentNegative, ReachedCap };

struct ForwardProbe {
    ForwardOutcome outcome = ForwardOutcome::ReachedCap;
    double w_event = 0.0;
    double G_event = 0.0;
};

ForwardProbe probe_average_cost(const DriftFunction& drift, const InputProcess& input,
                                double v, double eps, const SolverOptions& opts = {});

/// Forward value of G at w_end under average cost v, starting from G(0) = G0.
double integrate_G_forward(const DriftFunction& drift, const InputProcess& input,
                           double v, double G0, double w_end,
                           const SolverOptions& opts = {});

/// Average-cost iteration by bisection on v (binary search method).
DynamicPolicy solve_binary_search(const DriftFunction& drift, const InputProcess& input,
                                  double eps, const SolverOptions& opts = {});

/// Average-cost iteration by Newton-Raphson at a fixed fluid continuation
/// point W >= k_hat * m_e.
DynamicPolicy solve_newton(const DriftFunction& drift, const InputProcess& input,
                           double W, double eps, const SolverOptions& opts = {});

/// Newton solves at W, 2W, 4W, ... until successive costs agree within eps.
DynamicPolicy solve_with_doubling(const DriftFunction& drift, const InputProcess& input,
                                  double eps, const SolverOptions& opts = {});

/// Round-half-up integer rounding of k(w), floored at 0; also stored on the
/// policy itself.
IntPolicyTable discretize_policy(DynamicPolicy& policy);

void save_policy(const DynamicPolicy& policy, std::ostream& out);
DynamicPolicy load_policy(std::istream& in);

} // namespace sdlps
