#include "aoi/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aoi/parallel.hpp"
#include "aoi/rng.hpp"

namespace aoi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Candidate {
    std::vector<double> x;
    double value;
    std::vector<std::pair<AlphaVector, double>> trace;
    OptStatus status;
};

bool lex_less(const Candidate& a, const Candidate& b)
{
    if (a.value != b.value) {
        return a.value < b.value;
    }
    return a.x < b.x;
}

Candidate descend(const AlphaObjective& obj, std::vector<double> x, const AlphaSearchOptions& opts)
{
    const auto eval = [&](const std::vector<double>& p) { return evaluate(obj, AlphaVector(p)); };
    const std::size_t dim = x.size();
    const auto grid_points = static_cast<std::size_t>(std::floor((1.0 - 0.5 * opts.grid_step) / opts.grid_step));

    Candidate c{x, eval(x), {}, OptStatus::max_iters};
    c.trace.emplace_back(AlphaVector(x), c.value);

    std::vector<double> probe = x;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double max_change = 0.0;
        const double start_value = c.value;
        for (std::size_t j = 0; j < dim; ++j) {
            probe = c.x;
            const auto line = [&](double t) {
                probe[j] = t;
                return eval(probe);
            };
            std::size_t best_i = 1;
            double best_v = line(opts.grid_step);
            for (std::size_t i = 2; i <= grid_points; ++i) {
                const double v = line(opts.grid_step * static_cast<double>(i));
                if (v < best_v) {
                    best_v = v;
                    best_i = i;
                }
            }
            const double lo = best_i == 1 ? opts.alpha_floor : opts.grid_step * static_cast<double>(best_i - 1);
            const double hi = best_i == grid_points ? opts.alpha_cap : opts.grid_step * static_cast<double>(best_i + 1);
            auto [t, v] = golden_section_min(line, lo, hi, opts.tolerance);
            if (best_v < v) {
                t = opts.grid_step * static_cast<double>(best_i);
                v = best_v;
            }
            if (v < c.value) {
                max_change = std::max(max_change, std::abs(t - c.x[j]));
                c.x[j] = t;
                c.value = v;
                c.trace.emplace_back(AlphaVector(c.x), c.value);
            }
        }
        if (max_change < 10.0 * opts.tolerance || start_value - c.value <= 1e-15 * std::abs(start_value)) {
            c.status = OptStatus::converged;
            break;
        }
    }
    // Report the objective at the returned point exactly.
    c.value = eval(c.x);
    for (double a : c.x) {
        if (a >= opts.alpha_cap - 10.0 * opts.tolerance || a <= opts.alpha_floor + 10.0 * opts.tolerance) {
            c.status = OptStatus::boundary;
        }
    }
    return c;
}

class KEvaluator {
public:
    KEvaluator(const std::vector<HopTemplate>& hops, const KObjective& obj) : obj_(obj)
    {
        if (hops.empty()) {
            throw std::invalid_argument("network needs at least one hop");
        }
        tables_.reserve(hops.size());
        for (const auto& h : hops) {
            tables_.emplace_back(h.delay, h.n);
        }
        std::visit(overloaded{
                       [&](const objective::BuildingBlockPoisson& o) {
                           if (hops.size() != 1) {
                               throw std::invalid_argument("building-block objective needs exactly one hop");
                           }
                           if (!(o.mu > 0.0)) {
                               throw std::invalid_argument("arrival rate mu must be positive");
                           }
                       },
                       [&](const objective::TwoHopUpper&) {
                           if (hops.size() != 2) {
                               throw std::invalid_argument("two-hop objective needs exactly two hops");
                           }
                       },
                       [](const objective::LHopUpper&) {},
                   },
                   obj_);
    }

    std::size_t depth() const { return tables_.size(); }
    std::size_t fanout(std::size_t hop) const { return tables_[hop].n(); }

    double operator()(std::span<const std::size_t> ks) const
    {
        std::vector<HopMoments> m;
        m.reserve(ks.size());
        for (std::size_t l = 0; l < ks.size(); ++l) {
            m.push_back(hop_moments(tables_[l], ks[l]));
        }
        return std::visit(overloaded{
                              [&](const objective::BuildingBlockPoisson& o) {
                                  return age_building_block_poisson(m[0], o.mu).total;
                              },
                              [&](const objective::TwoHopUpper&) { return age_two_hop_upper(m[0], m[1]).total; },
                              [&](const objective::LHopUpper&) {
                                  return age_L_hop_upper(std::span<const HopMoments>(m)).total;
                              },
                          },
                          obj_);
    }

private:
    KObjective obj_;
    std::vector<HopMomentTable> tables_;
};

parallel::ScanMin scan(std::size_t count, bool omp, const auto& f)
{
    return omp ? parallel::argmin_omp(count, f) : parallel::argmin_serial(count, f);
}

} // namespace

const char* to_string(OptStatus s) noexcept
{
    switch (s) {
    case OptStatus::converged:
        return "converged";
    case OptStatus::boundary:
        return "boundary";
    case OptStatus::max_iters:
        return "max_iters";
    }
    return "unknown";
}

std::size_t dimension(const AlphaObjective& obj)
{
    return std::visit(overloaded{
                          [](const objective::SingleHopLimit&) -> std::size_t { return 1; },
                          [](const objective::BuildingBlock&) -> std::size_t { return 1; },
                          [](const objective::LHop& o) -> std::size_t { return o.hops.size(); },
                      },
                      obj);
}

double evaluate(const AlphaObjective& obj, const AlphaVector& alphas)
{
    if (alphas.size() != dimension(obj)) {
        throw std::invalid_argument("alpha vector length does not match the objective");
    }
    return std::visit(overloaded{
                          [&](const objective::SingleHopLimit& o) { return age_single_hop_limit(o.hop, alphas[0]); },
                          [&](const objective::BuildingBlock& o) {
                              return age_building_block_approx(o.hop, o.mu, alphas[0]);
                          },
                          [&](const objective::LHop& o) {
                              return age_L_hop_approx(std::span<const HopParams>(o.hops), alphas);
                          },
                      },
                      obj);
}

AlphaOptResult optimize_alpha(const AlphaObjective& obj, const AlphaSearchOptions& opts)
{
    const std::size_t dim = dimension(obj);
    if (dim == 0) {
        throw std::invalid_argument("objective has no coordinates");
    }
    if (opts.multi_starts < 1 || !(opts.grid_step > 0.0 && opts.grid_step < 0.5) || !(opts.tolerance > 0.0)) {
        throw std::invalid_argument("invalid alpha search options");
    }

    CounterRng rng(stream_key(opts.seed, 0xa1fa));
    std::vector<std::vector<double>> starts(static_cast<std::size_t>(opts.multi_starts), std::vector<double>(dim));
    for (auto& s : starts) {
        for (auto& a : s) {
            a = 0.05 + 0.9 * rng.uniform();
        }
    }

    const auto runs = parallel::map_omp(starts.size(), [&](std::size_t i) { return descend(obj, starts[i], opts); });

    std::size_t best = 0;
    for (std::size_t i = 1; i < runs.size(); ++i) {
        if (lex_less(runs[i], runs[best])) {
            best = i;
        }
    }

    AlphaOptResult out{AlphaVector(runs[best].x), runs[best].value, {}, runs[best].status};
    for (const auto& r : runs) {
        out.trace.insert(out.trace.end(), r.trace.begin(), r.trace.end());
    }
    return out;
}

double evaluate(const KObjective& obj, const std::vector<HopTemplate>& hops, const std::vector<std::size_t>& ks)
{
    if (ks.size() != hops.size()) {
        throw std::invalid_argument("need one threshold per hop");
    }
    return KEvaluator(hops, obj)(ks);
}

KOptResult optimize_k_exact(const std::vector<HopTemplate>& hops, const KObjective& obj, const KSearchOptions& opts)
{
    const KEvaluator eval(hops, obj);
    const std::size_t depth = eval.depth();

    std::vector<std::size_t> ks(depth);
    for (std::size_t l = 0; l < depth; ++l) {
        ks[l] = eval.fanout(l);
    }

    KOptResult out{ks, eval(ks), {}, OptStatus::max_iters};
    out.trace.emplace_back(ks, out.value);

    if (depth == 1) {
        const auto best = scan(eval.fanout(0), opts.use_openmp, [&](std::size_t i) {
            const std::size_t k[1] = {i + 1};
            return eval(k);
        });
        out.argmin = {best.index + 1};
        out.value = best.value;
        out.trace.emplace_back(out.argmin, out.value);
        out.status = OptStatus::converged;
        return out;
    }

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        bool changed = false;
        for (std::size_t j = 0; j < depth; ++j) {
            const auto best = scan(eval.fanout(j), opts.use_openmp, [&](std::size_t i) {
                std::vector<std::size_t> probe = out.argmin;
                probe[j] = i + 1;
                return eval(probe);
            });
            if (best.index + 1 != out.argmin[j] && best.value <= out.value) {
                out.argmin[j] = best.index + 1;
                out.value = best.value;
                out.trace.emplace_back(out.argmin, out.value);
                changed = true;
            }
        }
        if (!changed) {
            out.status = OptStatus::converged;
            break;
        }
    }
    out.value = eval(out.argmin);
    return out;
}

KOptResult optimize_k_exhaustive(const std::vector<HopTemplate>& hops, const KObjective& obj, bool use_openmp)
{
    const KEvaluator eval(hops, obj);
    if (eval.depth() != 2) {
        throw std::invalid_argument("exhaustive scan is defined for two hops");
    }
    const auto f = [&](std::size_t r, std::size_t c) {
        const std::size_t k[2] = {r + 1, c + 1};
        return eval(k);
    };
    const auto best = use_openmp ? parallel::argmin_grid_omp(eval.fanout(0), eval.fanout(1), f)
                                 : parallel::argmin_grid_serial(eval.fanout(0), eval.fanout(1), f);
    std::vector<std::size_t> ks{best.row + 1, best.col + 1};
    return {ks, best.value, {{ks, best.value}}, OptStatus::converged};
}

} // namespace aoi
