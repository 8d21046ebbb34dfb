#include "aoi/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aoi {

namespace {

double ratio(std::size_t a, std::size_t b) { return static_cast<double>(a) / static_cast<double>(b); }

// (2n - k) / (2k) == E[M^2] / (2 E[M]) with p = k/n
double cycle_weight(std::size_t n, std::size_t k)
{
    return (2.0 * static_cast<double>(n) - static_cast<double>(k)) / (2.0 * static_cast<double>(k));
}

// Sums the components smallest magnitude first and fills in total.
void finalize(AgeBreakdown& b)
{
    std::vector<double> parts{b.service_term, b.cycle_term, b.variance_term};
    for (const auto& t : b.extra_terms) {
        parts.push_back(t.value);
    }
    std::sort(parts.begin(), parts.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    double total = 0.0;
    for (double p : parts) {
        total += p;
    }
    if (!std::isfinite(total) || total <= 0.0) {
        throw std::domain_error("average age evaluated to a nonpositive or nonfinite value");
    }
    b.total = total;
}

void check_residual(const InterarrivalMoments& z)
{
    if (!std::isfinite(z.mean_residual) || !std::isfinite(z.var_cycle) || z.mean_residual < 0.0
        || z.var_cycle < 0.0) {
        throw std::invalid_argument("interarrival moments must be finite and nonnegative");
    }
}

void check_mu(double mu)
{
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw std::invalid_argument("arrival rate mu must be positive and finite");
    }
}

std::vector<HopMoments> moments_of(const NetworkConfig& net)
{
    net.validate();
    std::vector<HopMoments> out;
    out.reserve(net.hops.size());
    for (const auto& h : net.hops) {
        out.push_back(hop_moments(h));
    }
    return out;
}

} // namespace

void HopConfig::validate() const
{
    if (n == 0) {
        throw std::invalid_argument("hop fan-out n must be positive");
    }
    if (k == 0 || k > n) {
        throw std::invalid_argument("hop threshold k=" + std::to_string(k) + " must satisfy 1 <= k <= n="
                                    + std::to_string(n));
    }
}

void NetworkConfig::validate() const
{
    if (hops.empty()) {
        throw std::invalid_argument("network needs at least one hop");
    }
    for (const auto& h : hops) {
        h.validate();
    }
}

double AgeBreakdown::sum_of_terms() const
{
    double s = service_term + cycle_term + variance_term;
    for (const auto& t : extra_terms) {
        s += t.value;
    }
    return s;
}

double AgeBreakdown::extra(const std::string& label) const
{
    for (const auto& t : extra_terms) {
        if (t.label == label) {
            return t.value;
        }
    }
    throw std::out_of_range("no age term named " + label);
}

HopMoments hop_moments(const HopConfig& hop)
{
    hop.validate();
    const auto os = order_stat_moments(hop.delay, hop.k, hop.n);
    return {hop.n, hop.k, mean_earliest_k_service(hop.delay, hop.k, hop.n), os.mean, os.variance};
}

HopMoments hop_moments(const HopMomentTable& table, std::size_t k)
{
    return {table.n(), k, table.service_mean(k), table.kth_mean(k), table.kth_variance(k)};
}

GeometricMoments geometric_moments(double p)
{
    if (!(p > 0.0) || p > 1.0) {
        throw std::invalid_argument("success probability must lie in (0, 1]");
    }
    return {1.0 / p, (2.0 - p) / (p * p)};
}

AgeBreakdown age_building_block(const HopMoments& hop, const InterarrivalMoments& z)
{
    check_residual(z);
    const double mean_cycle = hop.kth_mean + z.mean_residual;
    if (!(mean_cycle > 0.0)) {
        throw std::domain_error("mean cycle length E[X_{k:n}] + E[Z] must be positive");
    }
    AgeBreakdown b;
    b.service_term = hop.service_mean;
    b.service_by_hop = {hop.service_mean};
    b.cycle_term = cycle_weight(hop.n, hop.k) * mean_cycle;
    b.variance_term = z.var_cycle / (2.0 * mean_cycle);
    finalize(b);
    return b;
}

AgeBreakdown age_building_block(const HopConfig& hop, const InterarrivalMoments& z)
{
    return age_building_block(hop_moments(hop), z);
}

AgeBreakdown age_building_block_poisson(const HopMoments& hop, double mu)
{
    check_mu(mu);
    const double ex = hop.kth_mean;
    AgeBreakdown b;
    b.service_term = hop.service_mean;
    b.service_by_hop = {hop.service_mean};
    b.cycle_term = cycle_weight(hop.n, hop.k) / mu * (mu * ex + 1.0);
    b.variance_term = mu * hop.kth_variance / (2.0 * (mu * ex + 1.0));
    b.extra_terms.push_back({"interarrival_variance", 1.0 / (2.0 * (mu * mu * ex + mu))});
    finalize(b);
    return b;
}

AgeBreakdown age_building_block_poisson(const HopConfig& hop, double mu)
{
    return age_building_block_poisson(hop_moments(hop), mu);
}

AgeBreakdown age_L_hop_exact(const NetworkConfig& net, const InterarrivalMoments& z_last)
{
    const auto hops = moments_of(net);
    AgeBreakdown b = age_building_block(hops.back(), z_last);
    b.service_by_hop.clear();
    double service = 0.0;
    for (const auto& h : hops) {
        b.service_by_hop.push_back(h.service_mean);
        service += h.service_mean;
    }
    b.service_term = service;
    finalize(b);
    return b;
}

AgeBreakdown age_two_hop_exact(const HopConfig& h1, const HopConfig& h2, const InterarrivalMoments& z2)
{
    return age_L_hop_exact(NetworkConfig{{h1, h2}}, z2);
}

AgeBreakdown age_two_hop_upper(const HopMoments& h1, const HopMoments& h2)
{
    const double n1 = static_cast<double>(h1.n);
    const double k1 = static_cast<double>(h1.k);
    const double e1 = h1.kth_mean;
    const double e2 = h2.kth_mean;
    const double denom = k1 * e2 + n1 * e1;

    AgeBreakdown b;
    b.service_by_hop = {h1.service_mean, h2.service_mean};
    b.service_term = h1.service_mean + h2.service_mean;
    b.cycle_term = cycle_weight(h2.n, h2.k) * e2;
    b.extra_terms.push_back({"upstream_cycle", cycle_weight(h2.n, h2.k) * n1 / k1 * e1});
    b.variance_term = k1 * h2.kth_variance / (2.0 * denom);
    b.extra_terms.push_back({"interarrival_variance", n1 * n1 * e1 * e1 / (2.0 * k1 * denom)});
    finalize(b);
    return b;
}

AgeBreakdown age_two_hop_upper(const HopConfig& h1, const HopConfig& h2)
{
    return age_two_hop_upper(hop_moments(h1), hop_moments(h2));
}

double mean_upstream_interarrival(std::span<const HopMoments> hops)
{
    // E[S_l] = E[M_l] (E[X_{k_l:n}] + E[Z_l]) with E[Z_{l+1}] = E[S_l] and Z_1 = 0.
    double s = 0.0;
    for (std::size_t l = 0; l + 1 < hops.size(); ++l) {
        s = ratio(hops[l].n, hops[l].k) * (hops[l].kth_mean + s);
    }
    return s;
}

AgeBreakdown age_L_hop_upper(std::span<const HopMoments> hops)
{
    if (hops.empty()) {
        throw std::invalid_argument("network needs at least one hop");
    }
    const HopMoments& last = hops.back();
    const double upstream = mean_upstream_interarrival(hops);
    const double mean_cycle = last.kth_mean + upstream;
    const double w = cycle_weight(last.n, last.k);

    AgeBreakdown b;
    double service = 0.0;
    for (const auto& h : hops) {
        b.service_by_hop.push_back(h.service_mean);
        service += h.service_mean;
    }
    b.service_term = service;
    b.cycle_term = w * last.kth_mean;
    b.variance_term = last.kth_variance / (2.0 * mean_cycle);
    if (hops.size() > 1) {
        b.extra_terms.push_back({"upstream_cycle", w * upstream});
        b.extra_terms.push_back({"interarrival_variance", upstream * upstream / (2.0 * mean_cycle)});
    }
    finalize(b);
    return b;
}

AgeBreakdown age_L_hop_upper(const NetworkConfig& net)
{
    const auto hops = moments_of(net);
    return age_L_hop_upper(std::span<const HopMoments>(hops));
}

} // namespace aoi
