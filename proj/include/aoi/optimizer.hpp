#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "aoi/analytic.hpp"
#include "aoi/asymptotic.hpp"

namespace aoi {

enum class OptStatus { converged, boundary, max_iters };

const char* to_string(OptStatus s) noexcept;

template <class Point>
struct OptResult {
    Point argmin;
    double value;
    std::vector<std::pair<Point, double>> trace;
    OptStatus status;
};

using AlphaOptResult = OptResult<AlphaVector>;
using KOptResult = OptResult<std::vector<std::size_t>>;

namespace objective {

/// Generate-at-will single hop, mu -> infinity.
struct SingleHopLimit {
    HopParams hop;
};

/// Single hop with Poisson(mu) arrivals, large-n form.
struct BuildingBlock {
    HopParams hop;
    double mu;
};

/// L-hop large-n upper bound.
struct LHop {
    std::vector<HopParams> hops;
};

/// Exact single hop with Poisson(mu) arrivals (L = 1 only).
struct BuildingBlockPoisson {
    double mu;
};

/// Exact two-hop upper bound (L = 2 only).
struct TwoHopUpper {};

/// Exact L-hop upper bound.
struct LHopUpper {};

} // namespace objective

using AlphaObjective = std::variant<objective::SingleHopLimit, objective::BuildingBlock, objective::LHop>;
using KObjective = std::variant<objective::BuildingBlockPoisson, objective::TwoHopUpper, objective::LHopUpper>;

std::size_t dimension(const AlphaObjective& obj);
double evaluate(const AlphaObjective& obj, const AlphaVector& alphas);

struct AlphaSearchOptions {
    double grid_step = 0.01;
    double tolerance = 1e-7; ///< golden-section bracket width and sweep stopping change
    int multi_starts = 5;
    std::uint64_t seed = 0x5eed'a1fa;
    int max_sweeps = 2000;
    double alpha_floor = 1e-6;
    double alpha_cap = 1.0 - 1e-6;
};

/// Minimizes an asymptotic objective over the open unit cube: per-coordinate grid
/// scan, golden-section refinement of the winning cell, cyclic over coordinates,
/// from several seeded random starts. Deterministic for fixed options.
AlphaOptResult optimize_alpha(const AlphaObjective& obj, const AlphaSearchOptions& opts = {});

/// Fan-out and delay of one hop; the threshold is what gets optimized.
struct HopTemplate {
    std::size_t n;
    ShiftedExp delay;
};

struct KSearchOptions {
    int max_sweeps = 1000;
    bool use_openmp = true;
};

/// Evaluates the exact objective at thresholds ks.
double evaluate(const KObjective& obj, const std::vector<HopTemplate>& hops, const std::vector<std::size_t>& ks);

/// Integer thresholds: exhaustive for L = 1, cyclic coordinate descent (full
/// 1..n scan per coordinate, starting from k = n) for L >= 2. Smallest k wins ties.
KOptResult optimize_k_exact(const std::vector<HopTemplate>& hops, const KObjective& obj,
                            const KSearchOptions& opts = {});

/// Exhaustive 2-D scan for two hops; the oracle for coordinate descent.
KOptResult optimize_k_exhaustive(const std::vector<HopTemplate>& hops, const KObjective& obj,
                                 bool use_openmp = true);

/// Golden-section minimization of a unimodal function on [lo, hi] down to width tol.
template <class Fn>
std::pair<double, double> golden_section_min(Fn&& f, double lo, double hi, double tol);

} // namespace aoi

#include "aoi/detail/golden_section.hpp"
