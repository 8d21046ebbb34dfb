#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "aoi/analytic.hpp"
#include "aoi/simulator.hpp"

using aoi::ArrivalModel;
using aoi::HopConfig;
using aoi::NetworkConfig;
using aoi::ShiftedExp;
using aoi::SimConfig;
using aoi::SimMode;

namespace {

HopConfig hop(std::size_t n, std::size_t k, double lam = 1.0, double c = 1.0)
{
    return {n, k, ShiftedExp(lam, c)};
}

SimConfig config(NetworkConfig net, SimMode mode, std::uint64_t cycles = 100000, std::uint64_t seed = 1)
{
    SimConfig cfg;
    cfg.network = std::move(net);
    cfg.mode = mode;
    cfg.cycles = cycles;
    cfg.warmup_cycles = cycles / 10;
    cfg.seed = seed;
    return cfg;
}

bool within(const aoi::SimResult& r, double value, double sigmas)
{
    return std::abs(r.avg_age - value) <= sigmas * r.std_error;
}

} // namespace

TEST_CASE("single link, generate-at-will")
{
    for (auto mode : {SimMode::tagged_path, SimMode::full_tree}) {
        const auto r = aoi::simulate(config({{hop(1, 1)}}, mode, 200000));
        CHECK(within(r, 3.25, 4.0));
        CHECK(r.ci_halfwidth > 0.0);
        CHECK(r.batch_means.size() == 30);
    }
}

TEST_CASE("Poisson building block matches the closed form")
{
    for (double mu : {0.5, 1.0, 10.0}) {
        const auto h = hop(10, 5);
        const auto r = aoi::simulate_building_block(h, ArrivalModel::poisson(mu), config({}, SimMode::tagged_path, 200000));
        CAPTURE(mu);
        CHECK(within(r, aoi::age_building_block_poisson(h, mu).total, 4.0));
        const auto& s = r.per_hop[0];
        CHECK(std::abs(s.mean_cycles_between - 2.0) <= 4.0 * std::sqrt(s.var_cycles_between / s.receptions));
        CHECK(s.mean_residual > 0.0);
    }
}

TEST_CASE("deterministic arrivals match the building block with measured residual moments")
{
    const auto h = hop(8, 3, 2.0, 0.5);
    const auto r = aoi::simulate_building_block(h, ArrivalModel::every(1.3), config({}, SimMode::tagged_path, 300000));
    const auto& s = r.per_hop[0];
    const double exact = aoi::age_building_block(h, aoi::InterarrivalMoments{s.mean_residual, s.var_cycle}).total;
    CHECK(within(r, exact, 4.0));
}

TEST_CASE("measured per-hop cycle statistics follow the order statistics")
{
    const NetworkConfig net{{hop(10, 6), hop(10, 9)}};
    const auto r = aoi::simulate(config(net, SimMode::full_tree));
    REQUIRE(r.per_hop.size() == 2);
    const auto m1 = aoi::hop_moments(net.hops[0]);
    const auto m2 = aoi::hop_moments(net.hops[1]);
    CHECK(r.per_hop[0].mean_kth == doctest::Approx(m1.kth_mean).epsilon(5e-3));
    CHECK(r.per_hop[1].mean_kth == doctest::Approx(m2.kth_mean).epsilon(5e-3));
    CHECK(r.per_hop[0].mean_residual == 0.0);
    CHECK(r.per_hop[0].success_fraction == doctest::Approx(0.6).epsilon(1e-3));
    CHECK(r.per_hop[1].success_fraction == doctest::Approx(0.9).epsilon(1e-3));
    CHECK(r.end_nodes_measured == 100);
    CHECK(r.per_hop_interarrival.size() == 2);
    // Exponential relay arrivals give an upper bound that the simulation must respect.
    CHECK(r.avg_age <= aoi::age_two_hop_upper(net.hops[0], net.hops[1]).total + 3.0 * r.std_error);
}

TEST_CASE("update counts are conserved")
{
    const NetworkConfig nets[] = {
        NetworkConfig{{hop(6, 2)}},
        NetworkConfig{{hop(5, 3), hop(4, 2)}},
        NetworkConfig{{hop(3, 2), hop(3, 3), hop(4, 1)}},
    };
    for (const auto& net : nets) {
        for (auto mode : {SimMode::tagged_path, SimMode::full_tree}) {
            for (auto arr : {ArrivalModel::will(), ArrivalModel::poisson(2.0), ArrivalModel::every(0.7)}) {
                auto cfg = config(net, mode, 20000);
                cfg.arrivals = arr;
                const auto r = aoi::simulate(cfg);
                CHECK(r.generated_updates * r.end_nodes_measured
                      == r.successful_updates + r.dropped_updates + r.preempted_updates);
                CHECK(r.successful_updates > 0);
                if (arr.kind == ArrivalModel::Kind::generate_at_will && net.depth() == 1) {
                    CHECK(r.dropped_updates == 0);
                }
            }
        }
    }
}

TEST_CASE("reception trace is a valid sawtooth")
{
    auto cfg = config({{hop(5, 3), hop(5, 4)}}, SimMode::full_tree, 20000);
    cfg.record_trace = true;
    cfg.trace_limit = 2000;
    const auto r = aoi::simulate(cfg);
    REQUIRE(r.trace.size() == 2000);
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const auto& e = r.trace[i];
        CHECK(e.age_after == doctest::Approx(e.time - e.generated_at));
        CHECK(e.age_after >= 0.0);
        CHECK(e.age_after < e.age_before);
        if (i > 0) {
            CHECK(e.time > r.trace[i - 1].time);
            CHECK(e.generated_at > r.trace[i - 1].generated_at);
            CHECK(e.age_before == doctest::Approx(e.time - r.trace[i - 1].generated_at));
        }
    }
}

TEST_CASE("runs are bit-identical for a fixed seed and differ across seeds")
{
    for (auto mode : {SimMode::tagged_path, SimMode::full_tree}) {
        const auto cfg = config({{hop(7, 4), hop(6, 5)}}, mode, 30000, 99);
        const auto a = aoi::simulate(cfg);
        const auto b = aoi::simulate(cfg);
        CHECK(a == b);
        auto other = cfg;
        other.seed = 100;
        CHECK(aoi::simulate(other).avg_age != a.avg_age);
    }
}

TEST_CASE("full-tree and tagged-path estimates agree")
{
    const NetworkConfig net{{hop(8, 5, 1.5, 0.5), hop(6, 4, 0.8, 1.0)}};
    const auto full = aoi::simulate(config(net, SimMode::full_tree, 100000, 3));
    const auto tagged = aoi::simulate(config(net, SimMode::tagged_path, 100000, 4));
    CHECK(std::abs(full.avg_age - tagged.avg_age) <= full.ci_halfwidth + tagged.ci_halfwidth);
}

TEST_CASE("replications: serial and parallel give identical summaries")
{
    const auto cfg = config({{hop(5, 2)}}, SimMode::tagged_path, 10000, 5);
    const auto a = aoi::simulate_replications(cfg, 4, false);
    const auto b = aoi::simulate_replications(cfg, 4, true);
    REQUIRE(a.runs.size() == 4);
    CHECK(a.mean_age == b.mean_age);
    CHECK(a.ci_halfwidth == b.ci_halfwidth);
    CHECK(a.runs[0].avg_age != a.runs[1].avg_age);
    CHECK(aoi::replication_seed(5, 0) != aoi::replication_seed(5, 1));
    CHECK_THROWS(aoi::simulate_replications(cfg, 0));
}

TEST_CASE("t half-width")
{
    CHECK(aoi::t_halfwidth95({1.0}) == 0.0);
    // Two samples 0 and 2: sd = sqrt(2), half-width = t_{0.975,1} * sqrt(2) / sqrt(2)
    CHECK(aoi::t_halfwidth95({0.0, 2.0}) == doctest::Approx(12.7062047).epsilon(1e-6));
}

TEST_CASE("invalid simulation settings are rejected")
{
    auto cfg = config({{hop(3, 2)}}, SimMode::tagged_path, 1000);
    cfg.warmup_cycles = 1000;
    CHECK_THROWS_AS(aoi::simulate(cfg), std::invalid_argument);
    cfg = config({{hop(3, 2)}}, SimMode::tagged_path, 1000);
    cfg.arrivals = ArrivalModel::poisson(0.0);
    CHECK_THROWS_AS(aoi::simulate(cfg), std::invalid_argument);
    cfg = config({{hop(3, 4)}}, SimMode::tagged_path, 1000);
    CHECK_THROWS_AS(aoi::simulate(cfg), std::invalid_argument);
    cfg = config({{hop(1000, 2), hop(1000, 2), hop(1000, 2)}}, SimMode::full_tree, 1000);
    CHECK_THROWS_AS(aoi::simulate(cfg), std::invalid_argument);
    cfg = config({{hop(3, 2)}}, SimMode::tagged_path, 1000);
    CHECK_THROWS_AS(aoi::simulate_full_tree(cfg), std::invalid_argument);
}
