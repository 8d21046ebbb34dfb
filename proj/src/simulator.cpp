#include "aoi/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

#include "aoi/parallel.hpp"
#include "aoi/rng.hpp"
#include "compensated_sum.hpp"

namespace aoi {

namespace {

constexpr std::size_t max_full_tree_nodes = 1'000'000;
constexpr std::uint64_t arrival_stream = 0xa4417a15'0000'0001ULL;
constexpr std::uint64_t replication_stream = 0x7265706c'69636174ULL;

class Welford {
public:
    void add(double x) noexcept
    {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::uint64_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct HopAccumulator {
    std::uint64_t transmissions = 0;
    std::uint64_t receptions = 0;
    Welford kth;
    Welford residual;
    Welford cycle;
    Welford cycles_between;
    Welford interdelivery;
};

enum class EventKind : std::uint8_t { source, reception };

struct Event {
    double time;
    std::uint32_t node;
    std::uint64_t seq;
    std::uint64_t update;
    double generated_at;
    std::uint16_t level;
    EventKind kind;
};

// Min-heap order on (time, node, seq).
struct LaterEvent {
    bool operator()(const Event& a, const Event& b) const noexcept
    {
        return std::tie(a.time, a.node, a.seq) > std::tie(b.time, b.node, b.seq);
    }
};

struct NodeState {
    double busy_until = 0.0;
    double last_start = 0.0;
    double last_completion = 0.0;
    std::uint64_t transmissions = 0;
    double last_reception = 0.0;
    std::uint64_t parent_tx_at_reception = 0;
    bool received = false;
    double freshest = 0.0; // generation time of the freshest update held (end nodes)
};

struct Delivery {
    double delay;
    std::uint32_t child;
};

class Engine {
public:
    Engine(const SimConfig& cfg, SimMode mode) : cfg_(cfg), mode_(mode), hops_(cfg.network.hops)
    {
        cfg_.validate();
        const std::size_t L = hops_.size();
        level_offset_.assign(L + 1, 0);
        level_count_.assign(L + 1, 1);
        leaves_below_.assign(L + 1, 1);
        if (mode_ == SimMode::full_tree) {
            std::size_t total = 1;
            for (std::size_t l = 1; l <= L; ++l) {
                level_offset_[l] = total;
                level_count_[l] = level_count_[l - 1] * hops_[l - 1].n;
                total += level_count_[l];
                if (level_count_[l] > max_full_tree_nodes || total > max_full_tree_nodes) {
                    throw std::invalid_argument("full-tree simulation limited to 10^6 nodes; use tagged_path");
                }
            }
            for (std::size_t l = L; l-- > 0;) {
                leaves_below_[l] = leaves_below_[l + 1] * hops_[l].n;
            }
            nodes_.resize(total);
            std::size_t widest = 0;
            for (const auto& h : hops_) {
                widest = std::max(widest, h.n);
            }
            deliveries_.resize(widest);
        } else {
            for (std::size_t l = 1; l <= L; ++l) {
                level_offset_[l] = l;
            }
            nodes_.resize(L + 1);
            std::size_t widest = 0;
            for (const auto& h : hops_) {
                widest = std::max(widest, h.k);
            }
            order_stats_.resize(widest);
        }
        end_nodes_ = level_count_[L];
        hop_acc_.resize(L);

        const std::uint64_t measured = cfg_.cycles - cfg_.warmup_cycles;
        bounds_.resize(cfg_.batches + 1);
        for (std::size_t b = 0; b <= cfg_.batches; ++b) {
            bounds_[b] = cfg_.warmup_cycles + measured * b / cfg_.batches;
        }
        batch_area_.assign(cfg_.batches, 0.0);
        batch_length_.assign(cfg_.batches, 0.0);
    }

    SimResult run()
    {
        push(Event{0.0, 0, 0, 0, 0.0, 0, EventKind::source});
        while (!queue_.empty()) {
            const Event e = queue_.top();
            queue_.pop();
            if (e.kind == EventKind::source) {
                on_source(e);
            } else {
                on_reception(e);
            }
        }
        return finish();
    }

private:
    std::size_t depth() const { return hops_.size(); }

    void push(Event e)
    {
        e.seq = seq_++;
        queue_.push(e);
    }

    std::uint32_t parent_of(std::uint32_t node, std::size_t level) const
    {
        if (mode_ == SimMode::tagged_path) {
            return static_cast<std::uint32_t>(level - 1);
        }
        const std::size_t idx = node - level_offset_[level];
        return static_cast<std::uint32_t>(level_offset_[level - 1] + idx / hops_[level - 1].n);
    }

    void integrate_to(double t)
    {
        if (measuring_) {
            const double width = t - last_time_;
            const double mid = 0.5 * (t + last_time_);
            area_.add(width * (static_cast<double>(end_nodes_) * mid - sum_freshest_.value()));
        }
        last_time_ = t;
    }

    double interarrival(std::uint64_t g) const
    {
        if (cfg_.arrivals.kind == ArrivalModel::Kind::deterministic) {
            return cfg_.arrivals.period;
        }
        CounterRng rng(stream_key(cfg_.seed, arrival_stream, g));
        return rng.exponential(cfg_.arrivals.rate);
    }

    // Starts service of an update at a transmitter on `level`; returns X_{k:n}.
    double transmit(std::uint32_t node, std::size_t level, std::uint64_t update, double generated_at, double t)
    {
        const HopConfig& hop = hops_[level];
        CounterRng rng(stream_key(cfg_.seed, node, update));
        double kth = 0.0;

        if (mode_ == SimMode::full_tree) {
            for (std::size_t c = 0; c < hop.n; ++c) {
                deliveries_[c] = {hop.delay.sample(rng), static_cast<std::uint32_t>(c)};
            }
            const auto first = deliveries_.begin();
            const auto nth = first + static_cast<std::ptrdiff_t>(hop.k - 1);
            const auto last = first + static_cast<std::ptrdiff_t>(hop.n);
            std::nth_element(first, nth, last, [](const Delivery& a, const Delivery& b) {
                return std::tie(a.delay, a.child) < std::tie(b.delay, b.child);
            });
            kth = nth->delay;
            const std::size_t child_base = level_offset_[level + 1] + (node - level_offset_[level]) * hop.n;
            for (std::size_t i = 0; i < hop.k; ++i) {
                push(Event{t + deliveries_[i].delay, static_cast<std::uint32_t>(child_base + deliveries_[i].child), 0,
                           update, generated_at, static_cast<std::uint16_t>(level + 1), EventKind::reception});
            }
            preempted_ += (hop.n - hop.k) * leaves_below_[level + 1];
        } else {
            const std::span<double> os(order_stats_.data(), hop.k);
            sample_order_stat_prefix(hop.delay, hop.k, hop.n, rng, os);
            kth = os[hop.k - 1];
            const std::uint64_t rank = rng.below(hop.n);
            if (rank < hop.k) {
                push(Event{t + os[rank], static_cast<std::uint32_t>(level + 1), 0, update, generated_at,
                           static_cast<std::uint16_t>(level + 1), EventKind::reception});
            } else {
                ++preempted_;
            }
        }

        NodeState& s = nodes_[node];
        if (measuring_) {
            HopAccumulator& acc = hop_acc_[level];
            ++acc.transmissions;
            acc.kth.add(kth);
            if (s.transmissions > 0) {
                acc.residual.add(t - s.last_completion);
                acc.cycle.add(t - s.last_start);
            }
        }
        s.busy_until = t + kth;
        s.last_start = t;
        s.last_completion = t + kth;
        ++s.transmissions;
        return kth;
    }

    void on_source(const Event& e)
    {
        const std::uint64_t g = e.update;
        const double t = e.time;
        if (next_bound_ < bounds_.size() && g == bounds_[next_bound_]) {
            integrate_to(t);
            if (next_bound_ > 0) {
                const std::size_t b = next_bound_ - 1;
                batch_area_[b] = area_.value() - area_at_batch_start_;
                batch_length_[b] = t - batch_start_;
            }
            if (next_bound_ == cfg_.batches) {
                measuring_ = false;
                window_end_ = t;
                ++next_bound_;
                return; // measurement over; no further updates
            }
            if (next_bound_ == 0) {
                window_start_ = t;
                measuring_ = true;
                last_time_ = t;
            }
            area_at_batch_start_ = area_.value();
            batch_start_ = t;
            ++next_bound_;
        }
        if (g >= cfg_.cycles) {
            return;
        }
        ++generated_;

        if (cfg_.arrivals.kind == ArrivalModel::Kind::generate_at_will) {
            const double kth = transmit(0, 0, g, t, t);
            push(Event{t + kth, 0, 0, g + 1, t + kth, 0, EventKind::source});
            return;
        }
        if (t >= nodes_[0].busy_until) {
            transmit(0, 0, g, t, t);
        } else {
            dropped_ += end_nodes_;
        }
        const double next = t + interarrival(g);
        push(Event{next, 0, 0, g + 1, next, 0, EventKind::source});
    }

    void on_reception(const Event& e)
    {
        const std::size_t level = e.level;
        const double t = e.time;
        NodeState& s = nodes_[e.node];
        const std::uint32_t parent = parent_of(e.node, level);

        if (measuring_) {
            HopAccumulator& acc = hop_acc_[level - 1];
            ++acc.receptions;
            if (s.received) {
                acc.interdelivery.add(t - s.last_reception);
                acc.cycles_between.add(static_cast<double>(nodes_[parent].transmissions - s.parent_tx_at_reception));
            }
        }
        s.received = true;
        s.last_reception = t;
        s.parent_tx_at_reception = nodes_[parent].transmissions;

        if (level == depth()) {
            ++successful_;
            if (e.generated_at > s.freshest) {
                integrate_to(t);
                const double before = t - s.freshest;
                sum_freshest_.add(e.generated_at - s.freshest);
                s.freshest = e.generated_at;
                if (cfg_.record_trace && measuring_ && e.node == level_offset_[level]
                    && trace_.size() < cfg_.trace_limit) {
                    trace_.push_back({t, e.generated_at, before, t - e.generated_at});
                }
            }
            return;
        }
        if (t >= s.busy_until) {
            transmit(e.node, level, e.update, e.generated_at, t);
        } else {
            dropped_ += leaves_below_[level];
        }
    }

    SimResult finish()
    {
        SimResult r;
        r.end_nodes_measured = end_nodes_;
        r.measured_time = window_end_ - window_start_;
        const double nodes = static_cast<double>(end_nodes_);
        r.avg_age = area_.value() / (nodes * r.measured_time);
        r.batch_means.resize(cfg_.batches);
        for (std::size_t b = 0; b < cfg_.batches; ++b) {
            r.batch_means[b] = batch_area_[b] / (nodes * batch_length_[b]);
        }
        r.ci_halfwidth = t_halfwidth95(r.batch_means);
        if (cfg_.batches > 1) {
            Welford w;
            for (double m : r.batch_means) {
                w.add(m);
            }
            r.std_error = std::sqrt(w.variance() / static_cast<double>(cfg_.batches));
        }
        r.generated_updates = generated_;
        r.successful_updates = successful_;
        r.dropped_updates = dropped_;
        r.preempted_updates = preempted_;

        for (std::size_t l = 0; l < depth(); ++l) {
            const HopAccumulator& a = hop_acc_[l];
            HopStats h;
            h.transmissions = a.transmissions;
            h.mean_kth = a.kth.mean();
            h.mean_residual = a.residual.mean();
            h.mean_cycle = a.cycle.mean();
            h.var_cycle = a.cycle.variance();
            h.cycles_observed = a.cycle.count();
            const double tracked = mode_ == SimMode::full_tree ? static_cast<double>(hops_[l].n) : 1.0;
            h.success_fraction = a.transmissions > 0
                                     ? static_cast<double>(a.receptions) / (static_cast<double>(a.transmissions) * tracked)
                                     : 0.0;
            h.receptions = a.receptions;
            h.mean_cycles_between = a.cycles_between.mean();
            h.var_cycles_between = a.cycles_between.variance();
            h.mean_interdelivery = a.interdelivery.mean();
            h.var_interdelivery = a.interdelivery.variance();
            h.interdeliveries = a.interdelivery.count();
            r.per_hop.push_back(h);
            r.per_hop_interarrival.push_back({h.mean_residual, h.var_cycle});
        }
        r.trace = std::move(trace_);
        return r;
    }

    SimConfig cfg_;
    SimMode mode_;
    std::vector<HopConfig> hops_;
    std::vector<std::size_t> level_offset_;
    std::vector<std::size_t> level_count_;
    std::vector<std::uint64_t> leaves_below_;
    std::size_t end_nodes_ = 1;
    std::vector<NodeState> nodes_;
    std::vector<Delivery> deliveries_;
    std::vector<double> order_stats_;
    std::vector<HopAccumulator> hop_acc_;

    std::priority_queue<Event, std::vector<Event>, LaterEvent> queue_;
    std::uint64_t seq_ = 0;

    std::vector<std::uint64_t> bounds_;
    std::size_t next_bound_ = 0;
    bool measuring_ = false;
    double window_start_ = 0.0;
    double window_end_ = 0.0;
    double last_time_ = 0.0;
    detail::CompensatedSum area_;
    detail::CompensatedSum sum_freshest_;
    double area_at_batch_start_ = 0.0;
    double batch_start_ = 0.0;
    std::vector<double> batch_area_;
    std::vector<double> batch_length_;

    std::uint64_t generated_ = 0;
    std::uint64_t successful_ = 0;
    std::uint64_t dropped_ = 0;
    std::uint64_t preempted_ = 0;
    std::vector<ReceptionRecord> trace_;
};

} // namespace

void ArrivalModel::validate() const
{
    switch (kind) {
    case Kind::generate_at_will:
        return;
    case Kind::poisson:
        if (!(rate > 0.0) || !std::isfinite(rate)) {
            throw std::invalid_argument("poisson arrival rate must be positive");
        }
        return;
    case Kind::deterministic:
        if (!(period > 0.0) || !std::isfinite(period)) {
            throw std::invalid_argument("deterministic arrival period must be positive");
        }
        return;
    }
}

void SimConfig::validate() const
{
    network.validate();
    arrivals.validate();
    if (cycles == 0) {
        throw std::invalid_argument("cycle budget must be positive");
    }
    if (cycles <= warmup_cycles) {
        throw std::invalid_argument("cycles must exceed warmup_cycles");
    }
    if (batches < 1) {
        throw std::invalid_argument("need at least one batch");
    }
    if (cycles - warmup_cycles < batches) {
        throw std::invalid_argument("fewer measured cycles than batches");
    }
}

double t_halfwidth95(const std::vector<double>& samples)
{
    if (samples.size() < 2) {
        return 0.0;
    }
    Welford w;
    for (double x : samples) {
        w.add(x);
    }
    const boost::math::students_t dist(static_cast<double>(samples.size() - 1));
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    return t * std::sqrt(w.variance() / static_cast<double>(samples.size()));
}

SimResult simulate_full_tree(const SimConfig& cfg)
{
    if (cfg.mode != SimMode::full_tree) {
        throw std::invalid_argument("simulate_full_tree requires mode full_tree");
    }
    return Engine(cfg, SimMode::full_tree).run();
}

SimResult simulate_tagged_path(const SimConfig& cfg)
{
    if (cfg.mode != SimMode::tagged_path) {
        throw std::invalid_argument("simulate_tagged_path requires mode tagged_path");
    }
    return Engine(cfg, SimMode::tagged_path).run();
}

SimResult simulate(const SimConfig& cfg)
{
    return cfg.mode == SimMode::full_tree ? simulate_full_tree(cfg) : simulate_tagged_path(cfg);
}

SimResult simulate_building_block(const HopConfig& hop, const ArrivalModel& arrivals, SimConfig cfg)
{
    cfg.network = NetworkConfig{{hop}};
    cfg.arrivals = arrivals;
    cfg.mode = SimMode::tagged_path;
    return simulate_tagged_path(cfg);
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t r)
{
    return stream_key(master, replication_stream, r);
}

ReplicationSummary simulate_replications(const SimConfig& cfg, std::size_t replications, bool use_openmp)
{
    if (replications == 0) {
        throw std::invalid_argument("need at least one replication");
    }
    cfg.validate();
    const auto one = [&](std::size_t r) {
        SimConfig c = cfg;
        c.seed = replication_seed(cfg.seed, r);
        return simulate(c);
    };
    ReplicationSummary s;
    s.runs = use_openmp ? parallel::map_omp(replications, one) : parallel::map_serial(replications, one);
    std::vector<double> means;
    means.reserve(s.runs.size());
    for (const auto& r : s.runs) {
        means.push_back(r.avg_age);
    }
    double total = 0.0;
    for (double m : means) {
        total += m;
    }
    s.mean_age = total / static_cast<double>(means.size());
    s.ci_halfwidth = t_halfwidth95(means);
    return s;
}

} // namespace aoi
