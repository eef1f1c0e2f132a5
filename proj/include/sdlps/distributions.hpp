#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace sdlps {

/// Per-replication random stream. Never shared across threads.
///
/// All sampling goes through inverse transforms on uniforms drawn from a
/// mt19937_64, so identical seeds give bit-identical draws on any platform.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on (0, 1), never exactly 0 or 1.
    double uniform() {
        const std::uint64_t bits = engine_() >> 11; // 53 random bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double exponential(double mean) { return -mean * std::log(uniform()); }

    /// Standard normal via Box-Muller (one value per call, mate discarded).
    double normal();

private:
    std::mt19937_64 engine_;
};

enum class DistFamily {
    Deterministic,
    Exponential,
    Erlang,
    Hyperexponential, // two-phase, balanced means
    DegenerateHyperexponential, // H*: mass at 0, else exponential
    Weibull,
    Lognormal,
    Pareto, // Lomax (shifted Pareto), finite variance
};

DistFamily parse_dist_family(const std::string& name);
std::string dist_family_name(DistFamily family);

/// A positive job-size / interarrival distribution pinned down by its mean
/// and squared coefficient of variation. Construction solves for the family
/// parameters; unreachable (mean, SCV) pairs are rejected.
class Distribution {
public:
    static Distribution make(DistFamily family, double mean, double scv);

    double sample(RngStream& rng) const;

    DistFamily family() const { return family_; }
    double mean() const { return mean_; }
    double scv() const { return scv_; }

private:
    Distribution() = default;

    DistFamily family_ = DistFamily::Exponential;
    double mean_ = 1.0;
    double scv_ = 1.0;
    // Family parameters (meaning depends on family_).
    double a_ = 0.0;
    double b_ = 0.0;
    int k_ = 1; // Erlang phases
};

} // namespace sdlps
