#include "sdlps/distributions.hpp"

#include "sdlps/errors.hpp"

#include <cmath>

namespace sdlps {

double RngStream::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

DistFamily parse_dist_family(const std::string& name) {
    if (name == "deterministic") return DistFamily::Deterministic;
    if (name == "exponential") return DistFamily::Exponential;
    if (name == "erlang") return DistFamily::Erlang;
    if (name == "hyperexponential" || name == "h2") return DistFamily::Hyperexponential;
    if (name == "hstar" || name == "degenerate-hyperexponential")
        return DistFamily::DegenerateHyperexponential;
    if (name == "weibull") return DistFamily::Weibull;
    if (name == "lognormal") return DistFamily::Lognormal;
    if (name == "pareto") return DistFamily::Pareto;
    throw ValidationError("unknown distribution family: '" + name + "'");
}

std::string dist_family_name(DistFamily family) {
    switch (family) {
        case DistFamily::Deterministic: return "deterministic";
        case DistFamily::Exponential: return "exponential";
        case DistFamily::Erlang: return "erlang";
        case DistFamily::Hyperexponential: return "hyperexponential";
        case DistFamily::DegenerateHyperexponential: return "hstar";
        case DistFamily::Weibull: return "weibull";
        case DistFamily::Lognormal: return "lognormal";
        case DistFamily::Pareto: return "pareto";
    }
    return "?";
}

namespace {

double weibull_scv(double shape) {
    const double g1 = std::tgamma(1.0 + 1.0 / shape);
    const double g2 = std::tgamma(1.0 + 2.0 / shape);
    return g2 / (g1 * g1) - 1.0;
}

} // namespace

Distribution Distribution::make(DistFamily family, double mean, double scv) {
    if (!(mean > 0.0)) throw ValidationError("distribution mean must be > 0");
    if (scv < 0.0) throw ValidationError("distribution SCV must be >= 0");

    Distribution d;
    d.family_ = family;
    d.mean_ = mean;
    d.scv_ = scv;

    switch (family) {
        case DistFamily::Deterministic:
            if (scv != 0.0)
                throw ValidationError("deterministic distribution requires SCV = 0");
            break;
        case DistFamily::Exponential:
            if (std::abs(scv - 1.0) > 1e-12)
                throw ValidationError("exponential distribution requires SCV = 1");
            break;
        case DistFamily::Erlang: {
            if (scv <= 0.0 || scv > 1.0)
                throw ValidationError("Erlang requires SCV in (0, 1]");
            const int k = static_cast<int>(std::lround(1.0 / scv));
            if (k < 1 || std::abs(k * scv - 1.0) > 1e-9)
                throw ValidationError("Erlang requires SCV = 1/k for integer k");
            d.k_ = k;
            d.a_ = mean / k; // phase mean
            break;
        }
        case DistFamily::Hyperexponential: {
            if (scv < 1.0)
                throw ValidationError("two-phase hyperexponential requires SCV >= 1");
            const double gamma = std::sqrt((scv - 1.0) / (scv + 1.0));
            const double p1 = 0.5 * (1.0 + gamma);
            d.a_ = p1;
            d.b_ = mean / (2.0 * p1); // branch-1 mean; branch 2 derived in sample()
            break;
        }
        case DistFamily::DegenerateHyperexponential: {
            if (scv < 1.0)
                throw ValidationError("degenerate hyperexponential requires SCV >= 1");
            d.a_ = 2.0 / (1.0 + scv); // p: probability of a nonzero job
            d.b_ = mean / d.a_;       // conditional mean of the nonzero branch
            break;
        }
        case DistFamily::Weibull: {
            if (!(scv > 0.0)) throw ValidationError("Weibull requires SCV > 0");
            double lo = 0.05, hi = 60.0;
            if (weibull_scv(lo) < scv || weibull_scv(hi) > scv)
                throw ValidationError("Weibull SCV out of solvable range");
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                (weibull_scv(mid) > scv ? lo : hi) = mid;
            }
            d.a_ = 0.5 * (lo + hi);                          // shape
            d.b_ = mean / std::tgamma(1.0 + 1.0 / d.a_);     // scale
            break;
        }
        case DistFamily::Lognormal: {
            if (!(scv > 0.0)) throw ValidationError("lognormal requires SCV > 0");
            const double s2 = std::log(1.0 + scv);
            d.a_ = std::log(mean) - 0.5 * s2; // log-mean
            d.b_ = std::sqrt(s2);             // log-stddev
            break;
        }
        case DistFamily::Pareto: {
            if (!(scv > 1.0))
                throw ValidationError("shifted Pareto with finite variance requires SCV > 1");
            d.a_ = 2.0 * scv / (scv - 1.0); // tail index alpha > 2
            d.b_ = mean * (d.a_ - 1.0);     // scale
            break;
        }
    }
    return d;
}

double Distribution::sample(RngStream& rng) const {
    switch (family_) {
        case DistFamily::Deterministic:
            return mean_;
        case DistFamily::Exponential:
            return rng.exponential(mean_);
        case DistFamily::Erlang: {
            double sum = 0.0;
            for (int i = 0; i < k_; ++i) sum += rng.exponential(a_);
            return sum;
        }
        case DistFamily::Hyperexponential: {
            const double p1 = a_;
            if (rng.uniform() < p1) return rng.exponential(b_);
            return rng.exponential(mean_ / (2.0 * (1.0 - p1)));
        }
        case DistFamily::DegenerateHyperexponential:
            return rng.uniform() < a_ ? rng.exponential(b_) : 0.0;
        case DistFamily::Weibull:
            return b_ * std::pow(-std::log(rng.uniform()), 1.0 / a_);
        case DistFamily::Lognormal:
            return std::exp(a_ + b_ * rng.normal());
        case DistFamily::Pareto:
            return b_ * (std::pow(rng.uniform(), -1.0 / a_) - 1.0);
    }
    return mean_;
}

} // namespace sdlps
