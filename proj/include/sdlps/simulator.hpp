#pragma once

#include "sdlps/input_process.hpp"
#include "sdlps/policy.hpp"
#include "sdlps/service_curve.hpp"

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

namespace sdlps {

struct StaticK {
    int K = 1;
};

using ConcurrencyPolicy = std::variant<StaticK, IntPolicyTable>;

struct SimConfig {
    SimConfig(ServiceRateCurve curve, InputProcess input)
        : curve(std::move(curve)), input(std::move(input)) {}

    ServiceRateCurve curve;
    InputProcess input;
    std::uint64_t horizon_events = 1'000'000;
    double warmup_fraction = 0.2;
    int batches = 32;

    // Headcount occupancy seen by every sample_stride-th post-warmup arrival
    // (PASTA samples), for distribution tests.
    bool collect_state_counts = false;
    std::uint64_t sample_stride = 200;
};

struct SimResult {
    double E_N = 0.0;
    double E_W = 0.0;
    double ci_N = 0.0; // 95% batch-means half-width
    double ci_W = 0.0;
    std::uint64_t events = 0;
    std::uint64_t seed = 0;
    bool stable_config = true;
    std::vector<std::uint64_t> state_counts;
};

/// One replication of the Sd-LPS queue under the given policy. Deterministic
/// for a fixed seed. An unstable static configuration still runs but comes
/// back flagged.
SimResult simulate(const SimConfig& config, const ConcurrencyPolicy& policy,
                   std::uint64_t seed);

/// simulate() across a K range with identical seeds (common random numbers).
std::vector<std::pair<int, SimResult>> sweep_static_K(const SimConfig& config,
                                                      const std::vector<int>& K_range,
                                                      std::uint64_t seed);

} // namespace sdlps
