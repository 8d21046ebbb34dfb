#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aoi/distributions.hpp"

namespace aoi {

/// One hop of the tree: each transmitter has n children and stops after the earliest k receive.
struct HopConfig {
    std::size_t n;
    std::size_t k;
    ShiftedExp delay;

    /// Throws std::invalid_argument unless 1 <= k <= n.
    void validate() const;
};

struct NetworkConfig {
    std::vector<HopConfig> hops;

    std::size_t depth() const noexcept { return hops.size(); }
    void validate() const;
};

/// Residual wait Z between a completion and the next service start, and the
/// variance of the full cycle Y = X_{k:n} + Z. Var[Y] is supplied jointly because
/// X_{k:n} and Z need not be independent.
struct InterarrivalMoments {
    double mean_residual;
    double var_cycle;

    friend bool operator==(const InterarrivalMoments&, const InterarrivalMoments&) = default;
};

struct AgeTerm {
    std::string label;
    double value;
};

/// Average age with its additive pieces. total == service_term + cycle_term +
/// variance_term + sum(extra_terms). service_by_hop splits service_term per hop
/// and is not counted again in the total.
struct AgeBreakdown {
    double total = 0.0;
    double service_term = 0.0;
    double cycle_term = 0.0;
    double variance_term = 0.0;
    std::vector<AgeTerm> extra_terms;
    std::vector<double> service_by_hop;

    double sum_of_terms() const;
    /// Value of the named extra term; throws std::out_of_range if absent.
    double extra(const std::string& label) const;
};

/// Order-statistic summary of one hop at a fixed threshold.
struct HopMoments {
    std::size_t n;
    std::size_t k;
    double service_mean; ///< (1/k) sum_{i<=k} E[X_{i:n}]
    double kth_mean;     ///< E[X_{k:n}]
    double kth_variance; ///< Var[X_{k:n}]
};

HopMoments hop_moments(const HopConfig& hop);
HopMoments hop_moments(const HopMomentTable& table, std::size_t k);

struct GeometricMoments {
    double mean;
    double second_moment;
};

/// Moments of the number of cycles between deliveries to a given child, success probability p.
GeometricMoments geometric_moments(double p);

/// Single transmitter with exogenous arrivals, residual moments supplied.
AgeBreakdown age_building_block(const HopConfig& hop, const InterarrivalMoments& z);
AgeBreakdown age_building_block(const HopMoments& hop, const InterarrivalMoments& z);

/// Single transmitter fed by Poisson(mu) arrivals.
AgeBreakdown age_building_block_poisson(const HopConfig& hop, double mu);
AgeBreakdown age_building_block_poisson(const HopMoments& hop, double mu);

/// Exact L-hop age given the last-hop residual moments: service summed over all
/// hops, cycle terms from the last hop.
AgeBreakdown age_L_hop_exact(const NetworkConfig& net, const InterarrivalMoments& z_last);

/// Two-hop exact age; z2 describes arrivals at the relays.
AgeBreakdown age_two_hop_exact(const HopConfig& h1, const HopConfig& h2, const InterarrivalMoments& z2);

/// Two-hop upper bound under exponential interarrivals at the relays.
AgeBreakdown age_two_hop_upper(const HopConfig& h1, const HopConfig& h2);
AgeBreakdown age_two_hop_upper(const HopMoments& h1, const HopMoments& h2);

/// L-hop upper bound under exponential interarrivals at every relay.
/// For L = 1 this is the generate-at-will single-hop age.
AgeBreakdown age_L_hop_upper(const NetworkConfig& net);
AgeBreakdown age_L_hop_upper(std::span<const HopMoments> hops);

/// Mean interarrival at the last-hop transmitters, sum_{l<L} E[X_{k_l:n}] prod_{i=l}^{L-1} n_i/k_i.
double mean_upstream_interarrival(std::span<const HopMoments> hops);

} // namespace aoi
