#include "sdlps/simulator.hpp"

#include "sdlps/errors.hpp"
#include "sdlps/stats.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <set>

namespace sdlps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One Sd-LPS replication. In-service jobs are kept as a multiset of keys
// (admission-time size + cumulative per-job drain at admission), so a PS
// drain step is a single offset update and the next departure is the min key.
class Replication {
public:
    Replication(const SimConfig& cfg, const ConcurrencyPolicy& policy, std::uint64_t seed)
        : cfg_(cfg), policy_(policy), rng_(seed), seed_(seed) {}

    SimResult run();

private:
    int Z() const { return static_cast<int>(in_service_.size()); }
    int Q() const { return static_cast<int>(queue_.size()); }
    int X() const { return Z() + Q(); }

    void admit_one() {
        in_service_.insert(queue_.front() + drain_);
        queue_.pop_front();
    }

    // Static rule: fill up to K. Dynamic rules: the arrival/departure
    // admission rules, with k_tilde floored at 1 whenever jobs are present
    // (rounding to 0 would deliberately idle the server).
    void admit_after_arrival() {
        if (const auto* st = std::get_if<StaticK>(&policy_)) {
            while (Z() < st->K && Q() > 0) admit_one();
            return;
        }
        const auto& table = std::get<IntPolicyTable>(policy_);
        const int z = Z();
        const double w_tilde = cfg_.input.m_e * z + cfg_.input.m * Q();
        const int k_req = std::max(table.at(w_tilde), 1);
        if (k_req >= z + 1 && Q() > 0) admit_one();
    }

    void admit_after_departures(int z_after) {
        if (const auto* st = std::get_if<StaticK>(&policy_)) {
            while (Z() < st->K && Q() > 0) admit_one();
            return;
        }
        const auto& table = std::get<IntPolicyTable>(policy_);
        const double w_tilde = cfg_.input.m_e * z_after + cfg_.input.m * Q();
        int k_req = table.at(w_tilde);
        if (X() >= 1) k_req = std::max(k_req, 1);
        int n_admit = std::min(std::max(k_req - z_after, 0), 2);
        n_admit = std::min(n_admit, Q());
        for (int i = 0; i < n_admit; ++i) admit_one();
    }

    void rebase() {
        std::multiset<double> shifted;
        for (double key : in_service_) shifted.insert(shifted.end(), key - drain_);
        in_service_.swap(shifted);
        drain_ = 0.0;
    }

    double recompute_workload() const {
        double w = 0.0;
        for (double key : in_service_) w += key - drain_;
        for (double v : queue_) w += v;
        return w;
    }

    const SimConfig& cfg_;
    const ConcurrencyPolicy& policy_;
    RngStream rng_;
    std::uint64_t seed_;

    double clock_ = 0.0;
    double drain_ = 0.0; // cumulative per-job service since last rebase
    std::multiset<double> in_service_;
    std::deque<double> queue_;
    double workload_ = 0.0;
};

SimResult Replication::run() {
    SimResult result;
    result.seed = seed_;

    if (const auto* st = std::get_if<StaticK>(&policy_)) {
        if (st->K < 1) throw ValidationError("static policy requires K >= 1");
        if (cfg_.input.lambda * cfg_.input.m >= cfg_.curve.mu(st->K)) {
            result.stable_config = false; // run anyway, flagged
        }
    }

    const std::uint64_t horizon = cfg_.horizon_events;
    const std::uint64_t warmup =
        static_cast<std::uint64_t>(cfg_.warmup_fraction * static_cast<double>(horizon));
    const int n_batches = std::max(1, cfg_.batches);
    const std::uint64_t measured = horizon > warmup ? horizon - warmup : 0;
    const std::uint64_t batch_events =
        std::max<std::uint64_t>(1, measured / static_cast<std::uint64_t>(n_batches));

    double next_arrival =
        cfg_.input.lambda > 0.0 ? cfg_.input.interarrival.sample(rng_) : kInf;

    double area_x = 0.0, area_w = 0.0, t_measured = 0.0;
    double batch_x = 0.0, batch_w = 0.0, batch_t = 0.0;
    std::vector<double> batch_means_x, batch_means_w;
    std::uint64_t arrivals_seen = 0;

    bool measuring = false;
    double measure_start = 0.0;

    for (std::uint64_t ev = 0; ev < horizon; ++ev) {
        const int z = Z();
        double dt_dep = kInf;
        double mu_z = 0.0;
        if (z > 0) {
            mu_z = cfg_.curve.mu(z);
            dt_dep = std::max(0.0, (*in_service_.begin() - drain_) * z / mu_z);
        }
        const double dt_arr = next_arrival - clock_;
        if (dt_dep == kInf && dt_arr == kInf) break; // lambda = 0, system drained

        const bool departure = dt_dep <= dt_arr;
        const double dt = departure ? dt_dep : dt_arr;

        // X is constant and W drains linearly at rate mu(Z) between events.
        if (measuring) {
            const double seg_x = static_cast<double>(X()) * dt;
            const double seg_w = workload_ * dt - 0.5 * mu_z * dt * dt;
            area_x += seg_x;
            area_w += seg_w;
            batch_x += seg_x;
            batch_w += seg_w;
            batch_t += dt;
        }

        clock_ += dt;
        if (z > 0) {
            drain_ += mu_z / z * dt;
            workload_ -= mu_z * dt;
        }

        if (departure) {
            const int z_pre = z;
            drain_ = *in_service_.begin(); // land exactly on the min residual
            const double tie_eps = 1e-12 * std::max(1.0, drain_);
            int departed = 0;
            while (!in_service_.empty() && *in_service_.begin() <= drain_ + tie_eps) {
                workload_ -= *in_service_.begin() - drain_; // cancel fp residue
                in_service_.erase(in_service_.begin());
                ++departed;
            }
            admit_after_departures(z_pre - departed);
        } else {
            ++arrivals_seen;
            if (measuring && cfg_.collect_state_counts &&
                arrivals_seen % cfg_.sample_stride == 0) {
                const std::size_t x = static_cast<std::size_t>(X());
                if (result.state_counts.size() <= x) result.state_counts.resize(x + 1, 0);
                ++result.state_counts[x];
            }
            const double v = cfg_.input.jobsize.sample(rng_);
            queue_.push_back(v);
            workload_ += v;
            admit_after_arrival();
            next_arrival = clock_ + cfg_.input.interarrival.sample(rng_);
        }

        if (in_service_.empty()) {
            drain_ = 0.0;
        } else if (drain_ > 1e7) {
            rebase();
        }
        if ((ev & 0xFFFFF) == 0xFFFFF) {
            workload_ = recompute_workload();
        }

        ++result.events;
        if (!measuring && ev + 1 >= warmup) {
            measuring = true;
            measure_start = clock_;
        } else if (measuring && batch_t > 0.0 &&
                   (ev + 1 - warmup) % batch_events == 0 &&
                   batch_means_x.size() + 1 < static_cast<std::size_t>(n_batches) * 2) {
            batch_means_x.push_back(batch_x / batch_t);
            batch_means_w.push_back(batch_w / batch_t);
            batch_x = batch_w = batch_t = 0.0;
        }
    }

    t_measured = clock_ - measure_start;
    if (measuring && t_measured > 0.0) {
        result.E_N = area_x / t_measured;
        result.E_W = area_w / t_measured;
        result.ci_N = batch_means_ci_halfwidth(batch_means_x);
        result.ci_W = batch_means_ci_halfwidth(batch_means_w);
    }
    return result;
}

} // namespace

SimResult simulate(const SimConfig& config, const ConcurrencyPolicy& policy,
                   std::uint64_t seed) {
    Replication rep(config, policy, seed);
    return rep.run();
}

std::vector<std::pair<int, SimResult>> sweep_static_K(const SimConfig& config,
                                                      const std::vector<int>& K_range,
                                                      std::uint64_t seed) {
    std::vector<std::pair<int, SimResult>> table;
    table.reserve(K_range.size());
    for (int K : K_range) {
        table.emplace_back(K, simulate(config, StaticK{K}, seed));
    }
    return table;
}

} // namespace sdlps
