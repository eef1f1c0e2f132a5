// sdlps command-line front end: static approximations, K sweeps, dynamic
// policy solves, and policy simulation, all driven by one config format.

#include "sdlps/birth_death.hpp"
#include "sdlps/config.hpp"
#include "sdlps/control.hpp"
#include "sdlps/errors.hpp"
#include "sdlps/rbm_analytics.hpp"
#include "sdlps/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace sdlps;

namespace {

constexpr const char* kVersion = "0.1.0";

int thread_count() {
    if (const char* env = std::getenv("SDLPS_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const int workers = std::min<int>(thread_count(), static_cast<int>(n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = next++; i < n; i = next++) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::ofstream open_output(const ExperimentConfig& cfg, const std::string& filename) {
    fs::create_directories(cfg.output_dir);
    const fs::path path = fs::path(cfg.output_dir) / filename;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write output file '" + path.string() + "'");
    out << "# sdlps " << kVersion << "\n";
    out << "# config " << cfg.digest << " " << run_mode_name(cfg.mode) << "\n";
    out.precision(10);
    return out;
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> horizon;
    std::optional<double> eps;
    std::optional<std::string> out_dir;

    void apply(ExperimentConfig& cfg) const {
        if (seed) cfg.seed = *seed;
        if (horizon) cfg.horizon = *horizon;
        if (eps) cfg.eps = *eps;
        if (out_dir) cfg.output_dir = *out_dir;
    }
};

double approx_mean_N(const ServiceRateCurve& curve, const InputProcess& input, int K) {
    const BirthDeathDistribution pi = birth_death_pi(curve, input, K);
    return static_mean_numjobs(pi, input, K);
}

void run_approx_static(const ExperimentConfig& cfg) {
    const ServiceRateCurve curve = curve_from_config(cfg);
    const InputProcess input = input_from_config(cfg);
    auto out = open_output(cfg, "approx_static.csv");
    out << "K,E_N_approx\n";
    for (int K : cfg.K_range) {
        out << K << "," << approx_mean_N(curve, input, K) << "\n";
    }
}

void run_sweep_static(const ExperimentConfig& cfg) {
    const ServiceRateCurve curve = curve_from_config(cfg);
    const InputProcess input = input_from_config(cfg);

    struct Row {
        int K = 0;
        double approx = std::nan("");
        SimResult sim;
    };
    std::vector<Row> rows(cfg.K_range.size());
    parallel_for(cfg.K_range.size(), [&](std::size_t i) {
        Row& row = rows[i];
        row.K = cfg.K_range[i];
        try {
            row.approx = approx_mean_N(curve, input, row.K);
        } catch (const InstabilityError&) {
            // unstable K: no approximation; the simulation row is flagged
        }
        SimConfig sim_cfg(curve, input);
        sim_cfg.horizon_events = cfg.horizon;
        sim_cfg.warmup_fraction = cfg.warmup;
        sim_cfg.batches = cfg.batches;
        row.sim = simulate(sim_cfg, StaticK{row.K}, cfg.seed);
    });

    auto out = open_output(cfg, "sweep_static.csv");
    out << "K,E_N_approx,E_N_sim,ci\n";
    for (const Row& row : rows) {
        out << row.K << "," << row.approx << "," << row.sim.E_N << "," << row.sim.ci_N
            << "\n";
    }

    // tidy plot data with the per-source optimum flagged
    std::size_t best_sim = 0, best_approx = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].sim.E_N < rows[best_sim].sim.E_N) best_sim = i;
        if (!(rows[i].approx >= rows[best_approx].approx)) best_approx = i;
    }
    auto plot = open_output(cfg, "sweep_static_plot.csv");
    plot << "K,source,value,ci,optimum\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        plot << rows[i].K << ",approx," << rows[i].approx << ",0,"
             << (i == best_approx ? 1 : 0) << "\n";
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        plot << rows[i].K << ",sim," << rows[i].sim.E_N << "," << rows[i].sim.ci_N << ","
             << (i == best_sim ? 1 : 0) << "\n";
    }
}

DynamicPolicy solve_from_config(const ExperimentConfig& cfg) {
    const ServiceRateCurve curve = curve_from_config(cfg);
    const InputProcess input = input_from_config(cfg);
    const int I_max = curve.max_level();
    const DriftFunction drift =
        drift_from_mu(curve, input, make_uniform_grid(0.0, I_max, 1024));
    DynamicPolicy policy = cfg.method == "binary-search"
                               ? solve_binary_search(drift, input, cfg.eps)
                               : solve_with_doubling(drift, input, cfg.eps);
    policy.toolkit_version = kVersion;
    policy.config_digest = cfg.digest;
    return policy;
}

void run_solve_dynamic(const ExperimentConfig& cfg) {
    const DynamicPolicy policy = solve_from_config(cfg);

    fs::create_directories(cfg.output_dir);
    const std::string filename =
        cfg.policy_file.empty() ? std::string("policy.txt") : cfg.policy_file;
    const fs::path path = fs::path(cfg.output_dir) / filename;
    std::ofstream pout(path);
    if (!pout) throw ConfigError("cannot write policy file '" + path.string() + "'");
    save_policy(policy, pout);

    auto trace = open_output(cfg, "solve_trace.csv");
    if (policy.provenance == SolveMethod::Newton) {
        trace << "iteration,v_n,abs_G0\n";
        for (std::size_t i = 0; i < policy.trace.size(); ++i) {
            trace << i << "," << policy.trace[i].v << ","
                  << std::abs(policy.trace[i].G0) << "\n";
        }
    } else {
        trace << "iteration,v_guess,bracket_width\n";
        for (std::size_t i = 0; i < policy.trace.size(); ++i) {
            trace << i << "," << policy.trace[i].v << "," << policy.trace[i].G0 << "\n";
        }
    }
    std::cout << "cost v = " << policy.v << ", policy written to " << path.string()
              << "\n";
}

void run_simulate_policy(const ExperimentConfig& cfg) {
    std::ifstream pin(cfg.policy_file);
    if (!pin) throw ConfigError("cannot open policy file '" + cfg.policy_file + "'");
    const DynamicPolicy policy = load_policy(pin);

    const ServiceRateCurve curve = curve_from_config(cfg);
    const InputProcess input = input_from_config(cfg);
    SimConfig sim_cfg(curve, input);
    sim_cfg.horizon_events = cfg.horizon;
    sim_cfg.warmup_fraction = cfg.warmup;
    sim_cfg.batches = cfg.batches;
    const SimResult res = simulate(sim_cfg, policy.k_tilde, cfg.seed);

    json record;
    record["version"] = kVersion;
    record["config"] = cfg.digest;
    record["policy_cost_v"] = policy.v;
    record["E_N"] = res.E_N;
    record["E_W"] = res.E_W;
    record["ci_N"] = res.ci_N;
    record["ci_W"] = res.ci_W;
    record["events"] = res.events;
    record["seed"] = res.seed;
    record["stable_config"] = res.stable_config;
    auto out = open_output(cfg, "simulate_policy.json");
    out << record.dump(2) << "\n";
    std::cout << record.dump(2) << "\n";
}

void run_reproduce_table1(const ExperimentConfig& cfg) {
    struct Cell {
        double cs2, lambda, paper;
        double sim = 0.0;
    };
    std::vector<Cell> cells = {
        {4.0, 0.7, 1.744}, {4.0, 0.8, 2.885}, {4.0, 0.9, 4.893},
        {19.0, 0.7, 2.94}, {19.0, 0.8, 6.63}, {19.0, 0.9, 14.33},
    };
    parallel_for(cells.size(), [&](std::size_t i) {
        Cell& cell = cells[i];
        const ServiceRateCurve curve = ServiceRateCurve::quadratic(1.25, 150.0);
        const InputProcess input =
            InputProcess::make(cell.lambda, DistFamily::Exponential, 1.0,
                               DistFamily::DegenerateHyperexponential, 1.0, cell.cs2);
        const DriftFunction drift =
            drift_from_mu(curve, input, make_uniform_grid(0.0, curve.max_level(), 1024));
        DynamicPolicy policy = solve_with_doubling(drift, input, cfg.eps);
        SimConfig sim_cfg(curve, input);
        sim_cfg.horizon_events = cfg.horizon;
        sim_cfg.warmup_fraction = cfg.warmup;
        sim_cfg.batches = cfg.batches;
        cell.sim = simulate(sim_cfg, policy.k_tilde, cfg.seed).E_N;
    });

    auto out = open_output(cfg, "table1.csv");
    out << "cs2,lambda,E_N_sim,paper_value,rel_err\n";
    for (const Cell& cell : cells) {
        out << cell.cs2 << "," << cell.lambda << "," << cell.sim << "," << cell.paper
            << "," << (cell.sim - cell.paper) / cell.paper << "\n";
    }
}

int run_validate(const std::string& path) {
    const ExperimentConfig cfg = load_config(path);
    const std::vector<std::string> findings = validate_config(cfg);
    if (findings.empty()) {
        std::cout << "OK: " << path << " (mode " << run_mode_name(cfg.mode) << ", config "
                  << cfg.digest << ")\n";
        return 0;
    }
    for (const std::string& f : findings) std::cout << f << "\n";
    return 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sd-LPS queue toolkit: diffusion approximations, average-cost "
                 "control solvers, and a discrete-event simulator"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    std::optional<RunMode> expected_mode;
    auto add_common = [&](CLI::App* sub, std::optional<RunMode> mode) {
        sub->add_option("config", config_path, "experiment config file")->required();
        sub->add_option("--seed", ov.seed, "override [sim] seed");
        sub->add_option("--horizon", ov.horizon, "override [sim] horizon");
        sub->add_option("--eps", ov.eps, "override [solver] eps");
        sub->add_option("--out", ov.out_dir, "override [output] dir");
        sub->callback([&, mode] { expected_mode = mode; });
    };
    add_common(app.add_subcommand("approx-static", "tabulate the E[N] approximation"),
               RunMode::ApproxStatic);
    add_common(app.add_subcommand("sweep-static",
                                  "approximation vs simulation across a K range"),
               RunMode::SweepStatic);
    add_common(app.add_subcommand("solve-dynamic", "solve for the dynamic policy"),
               RunMode::SolveDynamic);
    add_common(app.add_subcommand("simulate-policy", "simulate a saved dynamic policy"),
               RunMode::SimulatePolicy);
    add_common(app.add_subcommand("reproduce-table1",
                                  "diffusion policies on the quadratic-curve grid"),
               RunMode::ReproduceTable1);
    auto* validate_cmd =
        app.add_subcommand("validate", "schema and stability checks on a config");
    validate_cmd->add_option("config", config_path, "experiment config file")->required();
    validate_cmd->callback([&] { expected_mode = std::nullopt; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate_cmd->parsed()) return run_validate(config_path);

        ExperimentConfig cfg = load_config(config_path);
        ov.apply(cfg);
        if (expected_mode && cfg.mode != *expected_mode) {
            throw ConfigError("config mode is '" + run_mode_name(cfg.mode) +
                              "' but subcommand expects '" +
                              run_mode_name(*expected_mode) + "'");
        }
        switch (cfg.mode) {
        case RunMode::ApproxStatic: run_approx_static(cfg); break;
        case RunMode::SweepStatic: run_sweep_static(cfg); break;
        case RunMode::SolveDynamic: run_solve_dynamic(cfg); break;
        case RunMode::SimulatePolicy: run_simulate_policy(cfg); break;
        case RunMode::ReproduceTable1: run_reproduce_table1(cfg); break;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InstabilityError& e) {
        std::cerr << "instability: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
