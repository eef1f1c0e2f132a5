#include "sdlps/control.hpp"

#include "sdlps/errors.hpp"
#include "sdlps/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

namespace sdlps {

namespace {

// Accepted-step knots with cubic Hermite evaluation between them. The local
// error of the accepted steps already meets the integrator tolerance, so the
// interpolant is as accurate as the trajectory itself.
double hermite_eval(const std::vector<double>& w, const std::vector<double>& y,
                    const std::vector<double>& dy, double x) {
    if (w.empty()) throw NumericalError("empty interpolation table");
    if (x <= w.front()) return y.front();
    if (x >= w.back()) return y.back();
    const auto it = std::upper_bound(w.begin(), w.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - w.begin()) - 1;
    const double h = w[i + 1] - w[i];
    const double t = (x - w[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y[i] + (t3 - 2 * t2 + t) * h * dy[i] +
           (-2 * t3 + 3 * t2) * y[i + 1] + (t3 - t2) * h * dy[i + 1];
}

struct HermiteTable {
    std::vector<double> w, y, dy;

    void add(double wi, double yi, double di) {
        w.push_back(wi);
        y.push_back(yi);
        dy.push_back(di);
    }

    void sort_ascending() {
        if (w.size() > 1 && w.front() > w.back()) {
            std::reverse(w.begin(), w.end());
            std::reverse(y.begin(), y.end());
            std::reverse(dy.begin(), dy.end());
        }
    }

    double eval(double x) const { return hermite_eval(w, y, dy, x); }
};

double golden_min(const std::function<double(double)>& f, double a, double b,
                  double& fmin) {
    static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 64 && b - a > 1e-14 * (1.0 + std::abs(b)); ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    const double xm = 0.5 * (a + b);
    fmin = f(xm);
    return xm;
}

// RHS of the optimality ODE for G: the inner minimization feeds back into the
// gradient, so it is re-evaluated at every stage point.
struct GRhs {
    const DriftFunction& drift;
    const InputProcess& input;
    double v;
    int k_grid;

    std::array<double, 1> operator()(double w, const std::array<double, 1>& y) const {
        double h_star = 0.0;
        inner_argmin(std::max(w, 0.0), y[0], drift, input, &h_star, k_grid);
        return {2.0 / input.sigma2 * (v - std::max(w, 0.0) / input.m - h_star)};
    }
};

// Joint RHS for (G, g) in the Newton backward sweep.
struct GgRhs {
    const DriftFunction& drift;
    const InputProcess& input;
    double v;
    int k_grid;

    std::array<double, 2> operator()(double w, const std::array<double, 2>& y) const {
        const double wc = std::max(w, 0.0);
        double h_star = 0.0;
        const double k = inner_argmin(wc, y[0], drift, input, &h_star, k_grid);
        const double c = 2.0 / input.sigma2;
        return {c * (v - wc / input.m - h_star), c * (1.0 + drift(k) * y[1])};
    }
};

constexpr double kEventTol = 1e-10; // workload localization for binary-search probe events

} // namespace

double inner_argmin(double w, double G_val, const DriftFunction& drift,
                    const InputProcess& input, double* objective, int k_grid) {
    if (!(w >= 0.0)) throw ValidationError("inner_argmin requires w >= 0");
    if (!std::isfinite(G_val)) throw ValidationError("inner_argmin requires finite G");
    const double c1 = 1.0 - input.m_e / input.m;
    const auto h = [&](double k) { return k * c1 - drift(k) * G_val; };

    const double k_max = w / input.m_e;
    if (k_max <= 0.0) {
        if (objective) *objective = h(0.0);
        return 0.0;
    }
    const int n = std::max(2, k_grid);
    double best_k = 0.0, best_h = h(0.0);
    for (int i = 1; i < n; ++i) {
        const double k = k_max * static_cast<double>(i) / static_cast<double>(n - 1);
        const double hk = h(k);
        if (hk < best_h) {
            best_h = hk;
            best_k = k;
        }
    }
    // Local polish around the best grid cell; keep the grid point on ties so
    // flat objectives still resolve toward smaller k.
    const double cell = k_max / static_cast<double>(n - 1);
    const double lo = std::max(0.0, best_k - cell);
    const double hi = std::min(k_max, best_k + cell);
    double f_polished = 0.0;
    const double k_polished = golden_min(h, lo, hi, f_polished);
    if (f_polished < best_h) {
        best_h = f_polished;
        best_k = k_polished;
    }
    if (objective) *objective = best_h;
    return best_k;
}

double fluid_policy(double w, const DriftFunction& drift, const InputProcess& input) {
    if (!(w >= 0.0)) throw ValidationError("fluid_policy requires w >= 0");
    const double x_max = w / input.m_e;
    if (x_max >= drift.k_hat()) return drift.k_hat();
    // theta is piecewise linear, so the constrained argmax sits on a grid
    // knot or at the constraint boundary; first hit wins (smallest k).
    double best_x = 0.0, best_v = drift(0.0);
    for (std::size_t i = 0; i < drift.grid().size(); ++i) {
        const double x = drift.grid()[i];
        if (x > x_max) break;
        if (drift.values()[i] > best_v) {
            best_v = drift.values()[i];
            best_x = x;
        }
    }
    if (drift(x_max) > best_v) best_x = x_max;
    return best_x;
}

FluidContinuation::FluidContinuation(const DriftFunction& drift, const InputProcess& input,
                                     const SolverOptions& opts) {
    theta_hat_ = drift.theta_hat();
    if (!(theta_hat_ > 0.0)) {
        throw InstabilityError("unstabilizable: max drift theta_hat = " +
                               std::to_string(theta_hat_) + " <= 0");
    }
    const double k_hat = drift.k_hat();
    const double m = input.m, m_e = input.m_e, sigma2 = input.sigma2;
    knee_ = k_hat * m_e;
    line_slope_ = 1.0 / (m * theta_hat_);
    line_c0_ = (k_hat * (1.0 - m_e / m) + sigma2 / (2.0 * m * theta_hat_)) / theta_hat_;
    line_c1_ = -1.0 / theta_hat_;

    if (knee_ <= 0.0) {
        A0_ = line_c0_;
        B0_ = line_c1_;
        return;
    }

    // Gbar_v is affine in v, so one backward sweep of (A, B) with
    // Gbar_v = A + B v covers every cost guess.
    auto rhs = [&](double w, const std::array<double, 2>& y) -> std::array<double, 2> {
        const double wc = std::max(w, 0.0);
        const double kf = fluid_policy(wc, drift, input);
        const double th = drift(kf);
        const double c = 2.0 / sigma2;
        return {c * (-wc / m - kf * (1.0 - m_e / m) + th * y[0]), c * (1.0 + th * y[1])};
    };
    std::array<double, 2> y0 = {(k_hat + sigma2 / (2.0 * m * theta_hat_)) / theta_hat_,
                                -1.0 / theta_hat_};

    HermiteTable ta, tb;
    auto record = [&](double w, const std::array<double, 2>& y) {
        const auto d = rhs(w, y);
        ta.add(w, y[0], d[0]);
        tb.add(w, y[1], d[1]);
    };
    record(knee_, y0);
    rk45_integrate<2>(rhs, knee_, 0.0, y0, opts.rtol, opts.atol,
                      [&](double, const std::array<double, 2>&, double w_new,
                          const std::array<double, 2>& y_new) {
                          record(w_new, y_new);
                          return true;
                      });
    ta.sort_ascending();
    tb.sort_ascending();
    w_ = ta.w;
    A_ = ta.y;
    dA_ = ta.dy;
    B_ = tb.y;
    dB_ = tb.dy;
    A0_ = A_.front();
    B0_ = B_.front();
}

double FluidContinuation::value(double v, double w) const {
    if (w >= knee_ || w_.empty()) return line_slope_ * w + line_c0_ + line_c1_ * v;
    return hermite_eval(w_, A_, dA_, w) + hermite_eval(w_, B_, dB_, w) * v;
}

namespace {

struct ProbeDetail {
    ForwardProbe probe;
    HermiteTable G; // trajectory up to the event
};

ProbeDetail probe_impl(const DriftFunction& drift, const InputProcess& input,
                       const FluidContinuation& fluid, double v, double eps,
                       const SolverOptions& opts) {
    ProbeDetail out;
    if (fluid.at_zero(v) <= 0.0) {
        out.probe = {ForwardOutcome::HitBarrier, 0.0, 0.0};
        return out;
    }
    const GRhs rhs{drift, input, v, opts.k_grid};
    const double theta_hat = drift.theta_hat();
    const double w_cap = drift.k_hat() * input.m_e +
                         drift.sigma2() / theta_hat * (std::log(1.0 / eps) + 10.0);

    // Solve to a precise sub-step location by re-integrating from the step
    // start; each bisection span is tiny so the cost is negligible.
    auto value_at = [&](double w0, std::array<double, 1> y0, double w1) {
        if (w1 <= w0) return y0[0];
        rk45_integrate<1>(rhs, w0, w1, y0, opts.rtol, opts.atol,
                          [&](double, const std::array<double, 1>&, double,
                              const std::array<double, 1>& y_new) {
                              y0 = y_new;
                              return true;
                          });
        return y0[0];
    };
    auto localize = [&](double w0, const std::array<double, 1>& y0, double w1,
                        auto hit) {
        double lo = w0, hi = w1;
        while (hi - lo > kEventTol) {
            const double mid = 0.5 * (lo + hi);
            if (hit(mid, value_at(w0, y0, mid)))
                hi = mid;
            else
                lo = mid;
        }
        return std::pair<double, double>{hi, value_at(w0, y0, hi)};
    };

    bool done = false;
    std::array<double, 1> y = {0.0};
    out.G.add(0.0, 0.0, rhs(0.0, y)[0]);
    rk45_integrate<1>(
        rhs, 0.0, w_cap, y, opts.rtol, opts.atol,
        [&](double w_prev, const std::array<double, 1>& y_prev, double w_new,
            const std::array<double, 1>& y_new) {
            const bool barrier = y_new[0] >= fluid.value(v, w_new);
            const bool negative = y_new[0] < -eps;
            if (!barrier && !negative) {
                out.G.add(w_new, y_new[0], rhs(w_new, y_new)[0]);
                return true;
            }
            double wb = std::numeric_limits<double>::infinity(), gb = 0.0;
            double wn = std::numeric_limits<double>::infinity(), gn = 0.0;
            if (barrier) {
                std::tie(wb, gb) = localize(w_prev, y_prev, w_new,
                                            [&](double w, double G) {
                                                return G >= fluid.value(v, w);
                                            });
            }
            if (negative) {
                std::tie(wn, gn) = localize(w_prev, y_prev, w_new,
                                            [&](double, double G) { return G < -eps; });
            }
            if (wb <= wn) {
                out.probe = {ForwardOutcome::HitBarrier, wb, gb};
            } else {
                out.probe = {ForwardOutcome::WentNegative, wn, gn};
            }
            out.G.add(out.probe.w_event, out.probe.G_event,
                      rhs(out.probe.w_event, {out.probe.G_event})[0]);
            done = true;
            return false;
        });
    if (!done) out.probe = {ForwardOutcome::ReachedCap, w_cap, out.G.y.back()};
    return out;
}

void finalize_policy(DynamicPolicy& policy, const DriftFunction& drift,
                     const InputProcess& input, double eps,
                     const SolverOptions& opts) {
    policy.eps = eps;
    policy.drift_provenance = drift.provenance();
    policy.lambda = input.lambda;
    policy.m = input.m;
    policy.ca2 = input.ca2;
    policy.cs2 = input.cs2;
    discretize_policy(policy);
    (void)opts;
}

} // namespace

ForwardProbe probe_average_cost(const DriftFunction& drift, const InputProcess& input,
                                double v, double eps, const SolverOptions& opts) {
    if (!(eps > 0.0)) throw ValidationError("probe requires eps > 0");
    const FluidContinuation fluid(drift, input, opts);
    return probe_impl(drift, input, fluid, v, eps, opts).probe;
}

double integrate_G_forward(const DriftFunction& drift, const InputProcess& input,
                           double v, double G0, double w_end, const SolverOptions& opts) {
    const GRhs rhs{drift, input, v, opts.k_grid};
    std::array<double, 1> y = {G0};
    rk45_integrate<1>(rhs, 0.0, w_end, y, opts.rtol, opts.atol,
                      [&](double, const std::array<double, 1>&, double,
                          const std::array<double, 1>& y_new) {
                          y = y_new;
                          return true;
                      });
    return y[0];
}

DynamicPolicy solve_binary_search(const DriftFunction& drift, const InputProcess& input,
                                  double eps, const SolverOptions& opts) {
    if (!(eps > 0.0)) throw ValidationError("solver requires eps > 0");
    const FluidContinuation fluid(drift, input, opts);

    double L = 0.0, U = std::numeric_limits<double>::quiet_NaN();
    double v = 1.0;
    int doublings = 0;
    std::vector<NewtonIterate> guesses; // (guess, bracket width) for the trace
    while (std::isnan(U) || U - L >= eps) {
        const ForwardProbe probe = probe_impl(drift, input, fluid, v, eps, opts).probe;
        guesses.push_back({v, std::isnan(U) ? -1.0 : U - L, 0.0});
        if (probe.outcome == ForwardOutcome::WentNegative) {
            if (std::isnan(U)) {
                if (++doublings > opts.max_cost_doublings) {
                    throw ConfigError("no feasible average cost found after " +
                                      std::to_string(doublings - 1) + " doublings");
                }
                v *= 2.0;
            } else {
                L = v;
                v = 0.5 * (L + U);
            }
        } else {
            U = v;
            v = 0.5 * (L + U);
        }
    }

    // Re-solve at the certified cost to extract the policy trajectory.
    const ProbeDetail detail = probe_impl(drift, input, fluid, U, eps, opts);
    const double W_bar =
        detail.probe.outcome == ForwardOutcome::HitBarrier ? detail.probe.w_event
        : detail.probe.outcome == ForwardOutcome::ReachedCap ? detail.probe.w_event
                                                             : 0.0;
    const double knee = drift.k_hat() * input.m_e;
    double W_end = std::max(W_bar, knee);
    if (W_end <= 0.0) W_end = 20.0 * input.m;

    DynamicPolicy policy;
    policy.provenance = SolveMethod::BinarySearch;
    policy.trace = std::move(guesses);
    policy.v = U;
    policy.W = W_bar;
    policy.table.v = U;
    const std::size_t M = std::max<std::size_t>(2, opts.grid_points);
    policy.table.grid = make_uniform_grid(0.0, W_end, M);
    policy.table.G.resize(M);
    policy.table.k_of_w.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double w = policy.table.grid[i];
        if (w <= W_bar && !detail.G.w.empty()) {
            const double G = detail.G.eval(w);
            policy.table.G[i] = G;
            policy.table.k_of_w[i] = inner_argmin(w, G, drift, input, nullptr, opts.k_grid);
        } else {
            policy.table.G[i] = fluid.value(U, w);
            policy.table.k_of_w[i] = fluid_policy(w, drift, input);
        }
    }
    finalize_policy(policy, drift, input, eps, opts);
    return policy;
}

DynamicPolicy solve_newton(const DriftFunction& drift, const InputProcess& input,
                           double W, double eps, const SolverOptions& opts) {
    if (!(eps > 0.0)) throw ValidationError("solver requires eps > 0");
    const FluidContinuation fluid(drift, input, opts);
    const double knee = drift.k_hat() * input.m_e;
    if (W < knee) {
        throw ValidationError("fluid continuation point W = " + std::to_string(W) +
                              " below k_hat * m_e = " + std::to_string(knee));
    }
    const double theta_hat = drift.theta_hat();

    DynamicPolicy policy;
    policy.provenance = SolveMethod::Newton;
    policy.W = W;

    double v_n = std::isnan(opts.newton_v0) ? fluid.v_fluid0() : opts.newton_v0;
    HermiteTable G_tab, g_tab;
    double v_final = v_n;
    bool converged = false;
    for (int iter = 0; iter < opts.max_newton_iters; ++iter) {
        const GgRhs rhs{drift, input, v_n, opts.k_grid};
        std::array<double, 2> y = {fluid.value(v_n, W), -1.0 / theta_hat};
        G_tab = HermiteTable{};
        g_tab = HermiteTable{};
        auto record = [&](double w, const std::array<double, 2>& yv) {
            const auto d = rhs(w, yv);
            G_tab.add(w, yv[0], d[0]);
            g_tab.add(w, yv[1], d[1]);
        };
        record(W, y);
        rk45_integrate<2>(rhs, W, 0.0, y, opts.rtol, opts.atol,
                          [&](double, const std::array<double, 2>&, double w_new,
                              const std::array<double, 2>& y_new) {
                              record(w_new, y_new);
                              return true;
                          });
        G_tab.sort_ascending();
        g_tab.sort_ascending();
        const double G0 = y[0], g0 = y[1];
        policy.trace.push_back({v_n, G0, g0});
        if (!(g0 < 0.0)) {
            std::ostringstream msg;
            msg << "newton sweep produced g(0) = " << g0 << " >= 0 at v = " << v_n
                << " (W = " << W << "); integration failure";
            throw NumericalError(msg.str());
        }
        const double v_next = v_n - G0 / g0;
        if (std::abs(G0) <= eps) {
            v_final = v_next;
            converged = true;
            break;
        }
        if (std::abs(v_next - v_n) <= 1e-15 * std::max(1.0, std::abs(v_n))) {
            throw NumericalError("newton stalled with |G(0)| = " +
                                 std::to_string(std::abs(G0)) + " > eps");
        }
        v_n = v_next;
    }
    if (!converged) {
        throw NumericalError("newton did not converge within " +
                             std::to_string(opts.max_newton_iters) + " iterations");
    }

    policy.v = v_final;
    policy.table.v = v_final;
    const std::size_t M = std::max<std::size_t>(2, opts.grid_points);
    policy.table.grid = make_uniform_grid(0.0, W, M);
    policy.table.G.resize(M);
    policy.table.g.resize(M);
    policy.table.k_of_w.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double w = policy.table.grid[i];
        const double G = G_tab.eval(w);
        policy.table.G[i] = G;
        policy.table.g[i] = g_tab.eval(w);
        policy.table.k_of_w[i] =
            i + 1 == M ? fluid_policy(w, drift, input) // fluid control beyond W
                       : inner_argmin(w, G, drift, input, nullptr, opts.k_grid);
    }
    finalize_policy(policy, drift, input, eps, opts);
    return policy;
}

DynamicPolicy solve_with_doubling(const DriftFunction& drift, const InputProcess& input,
                                  double eps, const SolverOptions& opts) {
    if (!(eps > 0.0)) throw ValidationError("solver requires eps > 0");
    double W = std::max(4.0 * drift.k_hat() * input.m_e, 20.0 * input.m);
    DynamicPolicy prev = solve_newton(drift, input, W, eps, opts);
    for (int i = 0; i < opts.max_W_doublings; ++i) {
        W *= 2.0;
        DynamicPolicy cur = solve_newton(drift, input, W, eps, opts);
        if (std::abs(cur.v - prev.v) <= eps) return cur;
        prev = std::move(cur);
    }
    throw NumericalError("fluid continuation point doubling did not converge within " +
                         std::to_string(opts.max_W_doublings) + " doublings");
}

IntPolicyTable discretize_policy(DynamicPolicy& policy) {
    IntPolicyTable table;
    table.w_grid = policy.table.grid;
    table.k.resize(policy.table.k_of_w.size());
    for (std::size_t i = 0; i < table.k.size(); ++i) {
        // Round up (with slack for fp noise on exact integers). Rounding to the
        // nearest integer under-provisions wherever the control sits on the
        // admissibility boundary k(w) = w/m_e: there k_tilde = round(w/m_e)
        // opens a new slot only once ~m_e/2m jobs are queued, which idles the
        // server at moderate load and would deadlock an empty system. Rounding
        // up keeps the discrete policy at least as permissive as the
        // continuous one and reproduces the continuous policy's cost closely.
        table.k[i] = std::max(
            0, static_cast<int>(std::ceil(policy.table.k_of_w[i] - 1e-9)));
    }
    policy.k_tilde = table;
    return table;
}

void save_policy(const DynamicPolicy& policy, std::ostream& out) {
    out << std::setprecision(17);
    out << "sdlps-policy 1\n";
    if (!policy.toolkit_version.empty()) out << "version " << policy.toolkit_version << "\n";
    if (!policy.config_digest.empty()) out << "config " << policy.config_digest << "\n";
    out << "provenance "
        << (policy.provenance == SolveMethod::Newton ? "newton" : "binary-search") << "\n";
    out << "drift "
        << (policy.drift_provenance == DriftProvenance::FromPi ? "from-pi" : "from-mu")
        << "\n";
    out << "lambda " << policy.lambda << "\n";
    out << "m " << policy.m << "\n";
    out << "ca2 " << policy.ca2 << "\n";
    out << "cs2 " << policy.cs2 << "\n";
    out << "v " << policy.v << "\n";
    out << "W " << policy.W << "\n";
    out << "eps " << policy.eps << "\n";
    out << "points " << policy.table.grid.size() << "\n";
    for (std::size_t i = 0; i < policy.table.grid.size(); ++i) {
        out << policy.table.grid[i] << " " << policy.table.k_of_w[i] << " "
            << policy.k_tilde.k[i] << "\n";
    }
}

DynamicPolicy load_policy(std::istream& in) {
    DynamicPolicy policy;
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "sdlps-policy" || version != 1) {
        throw ConfigError("not a policy file (expected 'sdlps-policy 1' header)");
    }
    std::size_t points = 0;
    std::string key;
    while (in >> key) {
        if (key == "version") {
            in >> policy.toolkit_version;
        } else if (key == "config") {
            in >> policy.config_digest;
        } else if (key == "provenance") {
            std::string val;
            in >> val;
            if (val == "newton")
                policy.provenance = SolveMethod::Newton;
            else if (val == "binary-search")
                policy.provenance = SolveMethod::BinarySearch;
            else
                throw ConfigError("unknown policy provenance '" + val + "'");
        } else if (key == "drift") {
            std::string val;
            in >> val;
            if (val == "from-pi")
                policy.drift_provenance = DriftProvenance::FromPi;
            else if (val == "from-mu")
                policy.drift_provenance = DriftProvenance::FromMu;
            else
                throw ConfigError("unknown drift provenance '" + val + "'");
        } else if (key == "lambda") {
            in >> policy.lambda;
        } else if (key == "m") {
            in >> policy.m;
        } else if (key == "ca2") {
            in >> policy.ca2;
        } else if (key == "cs2") {
            in >> policy.cs2;
        } else if (key == "v") {
            in >> policy.v;
        } else if (key == "W") {
            in >> policy.W;
        } else if (key == "eps") {
            in >> policy.eps;
        } else if (key == "points") {
            in >> points;
            break;
        } else {
            throw ConfigError("unknown policy field '" + key + "'");
        }
        if (!in) throw ConfigError("malformed policy field '" + key + "'");
    }
    if (!in || points < 2) throw ConfigError("policy file missing table");
    policy.table.v = policy.v;
    policy.table.grid.resize(points);
    policy.table.k_of_w.resize(points);
    policy.k_tilde.w_grid.resize(points);
    policy.k_tilde.k.resize(points);
    for (std::size_t i = 0; i < points; ++i) {
        if (!(in >> policy.table.grid[i] >> policy.table.k_of_w[i] >> policy.k_tilde.k[i])) {
            throw ConfigError("policy table truncated at row " + std::to_string(i));
        }
        policy.k_tilde.w_grid[i] = policy.table.grid[i];
    }
    return policy;
}

} // namespace sdlps
