#pragma once

#include "sdlps/distributions.hpp"
#include "sdlps/input_process.hpp"
#include "sdlps/service_curve.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sdlps {

enum class RunMode {
    ApproxStatic,
    SweepStatic,
    SolveDynamic,
    SimulatePolicy,
    ReproduceTable1,
};

RunMode parse_run_mode(const std::string& name);
std::string run_mode_name(RunMode mode);

/// One experiment = one config file. INI-style sections; see README for the
/// schema. Parse errors carry file:line diagnostics.
struct ExperimentConfig {
    RunMode mode = RunMode::ApproxStatic;

    // [service] either an inline rate table mu(1..N) or "quadratic a b"
    // meaning mu(i) = a - i^2/b.
    std::vector<double> rates;
    bool quadratic = false;
    double quad_a = 0.0;
    double quad_b = 1.0;

    // [input]
    double lambda = 0.0;
    DistFamily arrival_family = DistFamily::Exponential;
    double ca2 = 1.0;
    DistFamily jobsize_family = DistFamily::Exponential;
    double m = 1.0;
    double cs2 = 1.0;

    // [static] concurrency levels for approx/sweep modes
    std::vector<int> K_range;

    // [solver]
    std::string method = "newton"; // newton | binary-search
    double eps = 1e-5;

    // [sim]
    std::uint64_t seed = 1;
    std::uint64_t horizon = 1'000'000;
    double warmup = 0.2;
    int batches = 32;

    // [output]
    std::string output_dir = ".";
    std::string policy_file; // SolveDynamic output / SimulatePolicy input

    std::string source_name; // file path or stream label
    std::string digest;      // FNV-1a of the raw config bytes, hex
};

ExperimentConfig parse_config(std::istream& in, const std::string& name);
ExperimentConfig load_config(const std::string& path);

ServiceRateCurve curve_from_config(const ExperimentConfig& cfg);
InputProcess input_from_config(const ExperimentConfig& cfg);

/// FNV-1a 64-bit digest, hex-encoded; embedded in every output artifact.
std::string fnv1a_hex(const std::string& bytes);

/// Schema + stability pre-checks; returns human-readable findings, one per
/// line, empty when everything is fine.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

} // namespace sdlps
