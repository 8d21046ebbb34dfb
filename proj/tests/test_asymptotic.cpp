#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "aoi/analytic.hpp"
#include "aoi/asymptotic.hpp"

using aoi::AlphaVector;
using aoi::HopParams;

namespace {

std::size_t threshold(double alpha, std::size_t n)
{
    return static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n)));
}

// Finite-n bound at k = alpha n for every hop.
double finite_bound(const std::vector<HopParams>& ps, const std::vector<double>& alpha, std::size_t n)
{
    aoi::NetworkConfig net;
    for (std::size_t l = 0; l < ps.size(); ++l) {
        net.hops.push_back({n, threshold(alpha[l], n), aoi::ShiftedExp(ps[l].rate, ps[l].shift)});
    }
    return aoi::age_L_hop_upper(net).total;
}

} // namespace

TEST_CASE("alpha vectors live strictly inside the unit cube")
{
    CHECK_THROWS_AS(AlphaVector({0.0}), std::invalid_argument);
    CHECK_THROWS_AS(AlphaVector({0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(AlphaVector({std::nan("")}), std::invalid_argument);
    CHECK_THROWS_AS(AlphaVector({}), std::invalid_argument);
    const AlphaVector a({0.2, 0.7});
    CHECK(a.size() == 2);
    CHECK(a[1] == 0.7);
}

TEST_CASE("single-hop limit closed form")
{
    const HopParams p{1.0, 1.0};
    const double a = 0.5;
    CHECK(aoi::age_single_hop_limit(p, a) == doctest::Approx(1.0 / a + 0.5 + 1.0 - std::log(1.0 - a) / 2.0));
}

TEST_CASE("large-n forms are the limits of the finite-n ages")
{
    const std::vector<HopParams> one{{1.0, 1.0}};
    const std::vector<HopParams> three{{1.0, 1.0}, {2.0, 0.5}, {0.7, 1.2}};
    const std::vector<double> a1{0.73};
    const std::vector<double> a3{0.6, 0.8, 0.95};
    double prev1 = 1e9, prev3 = 1e9;
    for (std::size_t n : {100u, 1000u, 10000u, 100000u}) {
        const double e1 = std::abs(finite_bound(one, a1, n) / aoi::age_single_hop_limit(one[0], a1[0]) - 1.0);
        const double e3 = std::abs(finite_bound(three, a3, n) / aoi::age_L_hop_approx(three, AlphaVector(a3)) - 1.0);
        CAPTURE(n);
        CHECK(e1 < prev1);
        CHECK(e3 < prev3);
        prev1 = e1;
        prev3 = e3;
    }
    CHECK(prev1 < 1e-4);
    CHECK(prev3 < 1e-4);
}

TEST_CASE("building-block form tends to the exact Poisson age and to the limit as mu grows")
{
    const HopParams p{1.0, 1.0};
    const double mu = 1.0, a = 0.84;
    const std::size_t n = 100000;
    const aoi::HopConfig h{n, threshold(a, n), aoi::ShiftedExp(1.0, 1.0)};
    CHECK(aoi::age_building_block_approx(p, mu, a)
          == doctest::Approx(aoi::age_building_block_poisson(h, mu).total).epsilon(1e-4));
    CHECK(aoi::age_building_block_approx(p, 1e9, 0.5) == doctest::Approx(aoi::age_single_hop_limit(p, 0.5)).epsilon(1e-7));
}

TEST_CASE("two-hop large-n form equals the L-hop form at L = 2")
{
    aoi::CounterRng rng(aoi::stream_key(91, 4));
    for (int trial = 0; trial < 200; ++trial) {
        const HopParams p1{0.1 + 5.0 * rng.uniform(), 3.0 * rng.uniform()};
        const HopParams p2{0.1 + 5.0 * rng.uniform(), 3.0 * rng.uniform()};
        const AlphaVector a({0.01 + 0.98 * rng.uniform(), 0.01 + 0.98 * rng.uniform()});
        const std::vector<HopParams> ps{p1, p2};
        const double two = aoi::age_two_hop_approx(p1, p2, a);
        const double ell = aoi::age_L_hop_approx(ps, a);
        CHECK(std::abs(two - ell) <= 1e-9 * std::abs(ell));
    }
}

TEST_CASE("dimension mismatch and bad parameters are rejected")
{
    const std::vector<HopParams> ps{{1.0, 1.0}, {1.0, 1.0}};
    CHECK_THROWS(aoi::age_L_hop_approx(ps, AlphaVector({0.5})));
    CHECK_THROWS(aoi::age_single_hop_limit(HopParams{-1.0, 1.0}, 0.5));
    CHECK_THROWS(aoi::age_building_block_approx(HopParams{1.0, 1.0}, 0.0, 0.5));
}
