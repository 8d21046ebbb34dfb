#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aoi/analytic.hpp"

namespace aoi {

enum class SimMode { full_tree, tagged_path };

/// Update arrivals at the root transmitter.
struct ArrivalModel {
    enum class Kind { generate_at_will, poisson, deterministic };

    Kind kind = Kind::generate_at_will;
    double rate = 0.0;   ///< poisson
    double period = 0.0; ///< deterministic

    static ArrivalModel will() { return {}; }
    static ArrivalModel poisson(double mu) { return {Kind::poisson, mu, 0.0}; }
    static ArrivalModel every(double period) { return {Kind::deterministic, 0.0, period}; }

    void validate() const;
};

struct SimConfig {
    NetworkConfig network;
    std::uint64_t cycles = 100'000;     ///< source updates generated (arrivals, for exogenous models)
    std::uint64_t warmup_cycles = 10'000;
    std::uint64_t seed = 1;
    SimMode mode = SimMode::tagged_path;
    std::size_t batches = 30;
    ArrivalModel arrivals = ArrivalModel::will();
    bool record_trace = false;       ///< keep reception records for the first measured end node
    std::size_t trace_limit = 10'000;

    void validate() const;
};

/// Empirical per-hop statistics, pooled over every transmitter of the hop
/// (one transmitter on the tagged path). Collected inside the measurement window.
struct HopStats {
    std::uint64_t transmissions = 0;
    double mean_kth = 0.0;         ///< E[X_{k:n}], the busy time per transmission
    double mean_residual = 0.0;    ///< E[Z]
    double mean_cycle = 0.0;       ///< E[Y], Y = X_{k:n} + Z
    double var_cycle = 0.0;        ///< Var[Y]
    std::uint64_t cycles_observed = 0;
    double success_fraction = 0.0; ///< fraction of tracked children served per transmission
    std::uint64_t receptions = 0;
    double mean_cycles_between = 0.0; ///< E[M]
    double var_cycles_between = 0.0;
    double mean_interdelivery = 0.0;  ///< E[S]
    double var_interdelivery = 0.0;
    std::uint64_t interdeliveries = 0;

    friend bool operator==(const HopStats&, const HopStats&) = default;
};

struct ReceptionRecord {
    double time;
    double generated_at;
    double age_before;
    double age_after;

    friend bool operator==(const ReceptionRecord&, const ReceptionRecord&) = default;
};

/// Update counts are per (update, measured end node) pair, over every generated
/// update including warm-up: generated * end_nodes == successful + dropped + preempted.
struct SimResult {
    double avg_age = 0.0;
    double ci_halfwidth = 0.0; ///< 95% batch means
    double std_error = 0.0;    ///< batch-means standard error
    std::size_t end_nodes_measured = 0;
    std::vector<InterarrivalMoments> per_hop_interarrival;
    std::vector<HopStats> per_hop;
    std::vector<double> batch_means;
    double measured_time = 0.0;
    std::uint64_t generated_updates = 0;
    std::uint64_t successful_updates = 0;
    std::uint64_t dropped_updates = 0;
    std::uint64_t preempted_updates = 0;
    std::vector<ReceptionRecord> trace;

    friend bool operator==(const SimResult&, const SimResult&) = default;
};

/// Whole n-ary tree, every end node measured. Guarded to at most 10^6 nodes.
SimResult simulate_full_tree(const SimConfig& cfg);

/// One root-to-leaf chain; O(k) work per transmission.
SimResult simulate_tagged_path(const SimConfig& cfg);

/// Dispatches on cfg.mode.
SimResult simulate(const SimConfig& cfg);

/// Single transmitter with n children, one tagged child measured.
SimResult simulate_building_block(const HopConfig& hop, const ArrivalModel& arrivals, SimConfig cfg);

/// Independent replications with seeds split from cfg.seed.
struct ReplicationSummary {
    std::vector<SimResult> runs;
    double mean_age = 0.0;
    double ci_halfwidth = 0.0; ///< 95% over replication means; 0 for a single run
};

ReplicationSummary simulate_replications(const SimConfig& cfg, std::size_t replications, bool use_openmp = true);

/// Seed of replication r.
std::uint64_t replication_seed(std::uint64_t master, std::size_t r);

/// 95% two-sided Student-t half-width for the mean of the samples.
double t_halfwidth95(const std::vector<double>& samples);

} // namespace aoi
