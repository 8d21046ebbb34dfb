#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "aoi/analytic.hpp"

using aoi::HopConfig;
using aoi::NetworkConfig;
using aoi::ShiftedExp;

namespace {

// Renewal-reward age at a tagged child: deliveries are M ~ Geom(k/n) cycles apart,
// each cycle Y = X_{k:n} + Z with Z ~ Exp(mean z_mean) independent (z_mean = 0 for
// generate-at-will). Age = E[upstream + own service] + E[S^2] / (2 E[S]).
double renewal_oracle(const HopConfig& h, double z_mean, double upstream_service)
{
    double kth = 0.0, kth_var = 0.0, svc = 0.0;
    for (std::size_t i = 1; i <= h.k; ++i) {
        // X_{i:n} = c + sum_{j<i} E_j/(lambda (n-j)), E_j standard exponentials
        double m = h.delay.shift(), v = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            const double r = h.delay.rate() * static_cast<double>(h.n - j);
            m += 1.0 / r;
            v += 1.0 / (r * r);
        }
        svc += m;
        if (i == h.k) {
            kth = m;
            kth_var = v;
        }
    }
    svc /= static_cast<double>(h.k);
    const double p = static_cast<double>(h.k) / static_cast<double>(h.n);
    const double em = 1.0 / p, em2 = (2.0 - p) / (p * p);
    const double ey = kth + z_mean;
    const double vy = kth_var + z_mean * z_mean;
    const double es = em * ey;
    const double es2 = em * vy + em2 * ey * ey;
    return upstream_service + svc + es2 / (2.0 * es);
}

HopConfig hop(std::size_t n, std::size_t k, double lam, double c)
{
    return {n, k, ShiftedExp(lam, c)};
}

} // namespace

TEST_CASE("single link reference values")
{
    const auto h = hop(1, 1, 1.0, 1.0);
    CHECK(aoi::age_L_hop_upper(NetworkConfig{{h}}).total == doctest::Approx(3.25).epsilon(1e-14));
    CHECK(aoi::age_building_block_poisson(h, 1.0).total == doctest::Approx(23.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("Poisson building block matches the renewal-reward oracle")
{
    aoi::CounterRng rng(aoi::stream_key(77, 1));
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(60);
        const std::size_t k = 1 + rng.below(n);
        const auto h = hop(n, k, 0.2 + 4.0 * rng.uniform(), 2.0 * rng.uniform());
        const double mu = 0.05 + 20.0 * rng.uniform();
        const auto b = aoi::age_building_block_poisson(h, mu);
        CHECK(b.total == doctest::Approx(renewal_oracle(h, 1.0 / mu, 0.0)).epsilon(1e-11));
        CHECK(b.sum_of_terms() == doctest::Approx(b.total).epsilon(1e-14));
        CHECK(b.extra("interarrival_variance") > 0.0);
    }
}

TEST_CASE("building block with supplied moments reduces to the Poisson form")
{
    const auto h = hop(12, 5, 1.5, 0.4);
    const double mu = 0.7;
    const auto m = aoi::hop_moments(h);
    const aoi::InterarrivalMoments z{1.0 / mu, m.kth_variance + 1.0 / (mu * mu)};
    CHECK(aoi::age_building_block(h, z).total
          == doctest::Approx(aoi::age_building_block_poisson(h, mu).total).epsilon(1e-13));
}

TEST_CASE("generate-at-will single hop matches the oracle with Z = 0")
{
    for (std::size_t n : {1u, 3u, 10u, 100u}) {
        for (std::size_t k = 1; k <= n; k += std::max<std::size_t>(1, n / 7)) {
            const auto h = hop(n, k, 0.9, 1.1);
            CHECK(aoi::age_L_hop_upper(NetworkConfig{{h}}).total
                  == doctest::Approx(renewal_oracle(h, 0.0, 0.0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("L-hop bound: exponential relay arrivals at the upstream mean interarrival")
{
    aoi::CounterRng rng(aoi::stream_key(78, 2));
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t depth = 2 + rng.below(3);
        NetworkConfig net;
        for (std::size_t l = 0; l < depth; ++l) {
            const std::size_t n = 1 + rng.below(40);
            net.hops.push_back(hop(n, 1 + rng.below(n), 0.3 + 3.0 * rng.uniform(), 1.5 * rng.uniform()));
        }
        // Oracle recursion for the mean interarrival at the last-hop transmitters.
        double s = 0.0, upstream = 0.0;
        for (std::size_t l = 0; l + 1 < depth; ++l) {
            const auto m = aoi::hop_moments(net.hops[l]);
            s = static_cast<double>(net.hops[l].n) / static_cast<double>(net.hops[l].k) * (m.kth_mean + s);
            upstream += m.service_mean;
        }
        std::vector<aoi::HopMoments> ms;
        for (const auto& h : net.hops) {
            ms.push_back(aoi::hop_moments(h));
        }
        CHECK(aoi::mean_upstream_interarrival(ms) == doctest::Approx(s).epsilon(1e-12));
        const auto b = aoi::age_L_hop_upper(net);
        CHECK(b.total == doctest::Approx(renewal_oracle(net.hops.back(), s, upstream)).epsilon(1e-11));
        CHECK(b.service_by_hop.size() == depth);
        CHECK(b.sum_of_terms() == doctest::Approx(b.total).epsilon(1e-14));
    }
}

TEST_CASE("two-hop bound equals the L-hop bound at L = 2")
{
    aoi::CounterRng rng(aoi::stream_key(79, 3));
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n1 = 1 + rng.below(300), n2 = 1 + rng.below(300);
        const auto h1 = hop(n1, 1 + rng.below(n1), 0.1 + 5.0 * rng.uniform(), 3.0 * rng.uniform());
        const auto h2 = hop(n2, 1 + rng.below(n2), 0.1 + 5.0 * rng.uniform(), 3.0 * rng.uniform());
        const double two = aoi::age_two_hop_upper(h1, h2).total;
        const double ell = aoi::age_L_hop_upper(NetworkConfig{{h1, h2}}).total;
        CHECK(std::abs(two - ell) <= 1e-9 * std::abs(ell));
    }
}

TEST_CASE("two-hop exact form agrees with the general exact form")
{
    const auto h1 = hop(10, 6, 1.0, 1.0), h2 = hop(10, 9, 1.0, 1.0);
    const aoi::InterarrivalMoments z{0.9, 2.1};
    CHECK(aoi::age_two_hop_exact(h1, h2, z).total
          == doctest::Approx(aoi::age_L_hop_exact(NetworkConfig{{h1, h2}}, z).total).epsilon(1e-14));
}

TEST_CASE("bound grows with link shift and falls with link rate")
{
    double prev = 0.0;
    for (double c = 0.0; c <= 3.0; c += 0.25) {
        const double a = aoi::age_two_hop_upper(hop(50, 30, 1.0, c), hop(50, 45, 1.0, 1.0)).total;
        CHECK(a > prev);
        prev = a;
    }
    prev = std::numeric_limits<double>::infinity();
    for (double lam = 0.25; lam <= 8.0; lam *= 2.0) {
        const double a = aoi::age_two_hop_upper(hop(50, 30, lam, 1.0), hop(50, 45, lam, 1.0)).total;
        CHECK(a < prev);
        prev = a;
    }
}

TEST_CASE("geometric cycle count moments")
{
    const auto g = aoi::geometric_moments(0.25);
    CHECK(g.mean == doctest::Approx(4.0));
    CHECK(g.second_moment == doctest::Approx(28.0));
    CHECK_THROWS(aoi::geometric_moments(0.0));
    CHECK_THROWS(aoi::geometric_moments(1.5));
}

TEST_CASE("invalid configurations are rejected")
{
    CHECK_THROWS_AS(aoi::age_L_hop_upper(NetworkConfig{{hop(5, 6, 1.0, 1.0)}}), std::invalid_argument);
    CHECK_THROWS_AS(aoi::age_L_hop_upper(NetworkConfig{{hop(5, 0, 1.0, 1.0)}}), std::invalid_argument);
    CHECK_THROWS(aoi::age_L_hop_upper(NetworkConfig{}));
    CHECK_THROWS(aoi::age_building_block_poisson(hop(5, 2, 1.0, 1.0), 0.0));
    CHECK_THROWS(aoi::age_building_block(hop(5, 2, 1.0, 1.0), aoi::InterarrivalMoments{-1.0, 1.0}));
    const auto b = aoi::age_building_block_poisson(hop(5, 2, 1.0, 1.0), 1.0);
    CHECK_THROWS_AS(b.extra("no_such_term"), std::out_of_range);
}
