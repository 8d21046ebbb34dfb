#include "aoi/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "aoi/asymptotic.hpp"
#include "aoi/optimizer.hpp"
#include "aoi/parallel.hpp"

namespace aoi::cli {

namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const auto next = s.find(sep, pos);
        parts.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
        if (next == std::string_view::npos) {
            break;
        }
        pos = next + 1;
    }
    return parts;
}

double to_double(const std::string& s, const std::string& field)
{
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw SpecError(field, "expected a number, got '" + s + "'");
    }
    return v;
}

std::size_t to_count(const std::string& s, const std::string& field)
{
    std::size_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end) {
        throw SpecError(field, "expected a non-negative integer, got '" + s + "'");
    }
    return v;
}

// Integer-valued sweep coordinate.
std::size_t as_count(double v, const std::string& field)
{
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9 || r < 0.0) {
        throw SpecError(field, fmt::format("value {} is not a non-negative integer", v));
    }
    return static_cast<std::size_t>(r);
}

std::string num(double v)
{
    return fmt::format("{}", v);
}

bool all_exact(const ExperimentSpec& spec)
{
    return std::all_of(spec.hops.begin(), spec.hops.end(), [](const HopSpec& h) { return h.n && h.k; });
}

bool all_have_n(const ExperimentSpec& spec)
{
    return std::all_of(spec.hops.begin(), spec.hops.end(), [](const HopSpec& h) { return h.n.has_value(); });
}

bool none_have_n(const ExperimentSpec& spec)
{
    return std::none_of(spec.hops.begin(), spec.hops.end(), [](const HopSpec& h) { return h.n.has_value(); });
}

std::vector<HopParams> params_of(const ExperimentSpec& spec)
{
    std::vector<HopParams> ps;
    for (const auto& h : spec.hops) {
        ps.push_back({h.rate, h.shift});
    }
    return ps;
}

std::string format_hops(const ExperimentSpec& spec)
{
    std::string out;
    for (const auto& h : spec.hops) {
        if (!out.empty()) {
            out += '|';
        }
        out += fmt::format("{}:{}:{}:{}", h.n ? std::to_string(*h.n) : "-", h.k ? std::to_string(*h.k) : "-",
                           num(h.rate), num(h.shift));
    }
    return out;
}

template <class Seq>
std::string join(const Seq& xs)
{
    std::string out;
    for (const auto& x : xs) {
        if (!out.empty()) {
            out += '|';
        }
        out += num(static_cast<double>(x));
    }
    return out;
}

const char* arrival_name(ArrivalModel::Kind k)
{
    switch (k) {
    case ArrivalModel::Kind::generate_at_will:
        return "will";
    case ArrivalModel::Kind::poisson:
        return "poisson";
    case ArrivalModel::Kind::deterministic:
        return "deterministic";
    }
    return "unknown";
}

Row base_row(const ExperimentSpec& spec, std::string quantity)
{
    Row r;
    r.quantity = std::move(quantity);
    r.hops = format_hops(spec);
    r.alpha = join(spec.alpha);
    r.mu = spec.mu;
    r.arrival = arrival_name(arrival_kind(spec));
    r.status = "ok";
    return r;
}

void add_breakdown(Row& r, const AgeBreakdown& b)
{
    r.detail.emplace_back("service", b.service_term);
    r.detail.emplace_back("cycle", b.cycle_term);
    r.detail.emplace_back("variance", b.variance_term);
    for (const auto& t : b.extra_terms) {
        r.detail.emplace_back(t.label, t.value);
    }
    for (std::size_t l = 0; l < b.service_by_hop.size(); ++l) {
        r.detail.emplace_back(fmt::format("service_hop{}", l + 1), b.service_by_hop[l]);
    }
}

std::vector<Row> eval_age(const ExperimentSpec& spec)
{
    const auto net = network_of(spec);
    const auto kind = arrival_kind(spec);
    AgeBreakdown b;
    std::string q;
    if (spec.z) {
        b = age_L_hop_exact(net, *spec.z);
        q = "age_exact";
    } else if (kind == ArrivalModel::Kind::poisson) {
        b = age_building_block_poisson(net.hops[0], *spec.mu);
        q = "age_building_block_poisson";
    } else if (net.depth() == 1) {
        b = age_L_hop_upper(net);
        q = "age_single_hop";
    } else if (net.depth() == 2) {
        b = age_two_hop_upper(net.hops[0], net.hops[1]);
        q = "age_two_hop_upper";
    } else {
        b = age_L_hop_upper(net);
        q = "age_L_hop_upper";
    }
    Row r = base_row(spec, q);
    r.value = b.total;
    add_breakdown(r, b);
    return {r};
}

std::vector<Row> eval_approx(const ExperimentSpec& spec)
{
    const auto ps = params_of(spec);
    const AlphaVector a(spec.alpha);
    Row r;
    if (ps.size() == 1 && arrival_kind(spec) == ArrivalModel::Kind::poisson) {
        r = base_row(spec, "approx_building_block");
        r.value = age_building_block_approx(ps[0], *spec.mu, a[0]);
    } else if (ps.size() == 1) {
        r = base_row(spec, "approx_single_hop_limit");
        r.value = age_single_hop_limit(ps[0], a[0]);
    } else if (ps.size() == 2) {
        // Both closed forms are reported; they are algebraically identical.
        r = base_row(spec, "approx_two_hop");
        r.value = age_two_hop_approx(ps[0], ps[1], a);
        r.detail.emplace_back("L_hop_form", age_L_hop_approx(ps, a));
    } else {
        r = base_row(spec, "approx_L_hop");
        r.value = age_L_hop_approx(ps, a);
    }
    return {r};
}

std::vector<Row> eval_optimize(const ExperimentSpec& spec)
{
    const bool poisson = arrival_kind(spec) == ArrivalModel::Kind::poisson;
    if (all_have_n(spec)) {
        std::vector<HopTemplate> hops;
        for (const auto& h : spec.hops) {
            hops.push_back({*h.n, ShiftedExp(h.rate, h.shift)});
        }
        KObjective obj = objective::LHopUpper{};
        if (poisson) {
            obj = objective::BuildingBlockPoisson{*spec.mu};
        } else if (hops.size() == 2) {
            obj = objective::TwoHopUpper{};
        }
        const auto res = optimize_k_exact(hops, obj);
        Row r = base_row(spec, "optimize_k");
        r.value = res.value;
        r.status = to_string(res.status);
        r.argmin.assign(res.argmin.begin(), res.argmin.end());
        for (std::size_t l = 0; l < hops.size(); ++l) {
            r.detail.emplace_back(fmt::format("ratio_hop{}", l + 1),
                                  static_cast<double>(res.argmin[l]) / static_cast<double>(hops[l].n));
        }
        return {r};
    }
    const auto ps = params_of(spec);
    AlphaObjective obj = objective::LHop{ps};
    if (ps.size() == 1) {
        obj = poisson ? AlphaObjective(objective::BuildingBlock{ps[0], *spec.mu})
                      : AlphaObjective(objective::SingleHopLimit{ps[0]});
    }
    const auto res = optimize_alpha(obj);
    Row r = base_row(spec, "optimize_alpha");
    r.value = res.value;
    r.status = to_string(res.status);
    r.argmin.assign(res.argmin.values().begin(), res.argmin.values().end());
    return {r};
}

void add_sim_detail(Row& r, const SimResult& s)
{
    r.detail.emplace_back("std_error", s.std_error);
    r.detail.emplace_back("end_nodes", static_cast<double>(s.end_nodes_measured));
    r.detail.emplace_back("measured_time", s.measured_time);
    r.detail.emplace_back("generated", static_cast<double>(s.generated_updates));
    r.detail.emplace_back("successful", static_cast<double>(s.successful_updates));
    r.detail.emplace_back("dropped", static_cast<double>(s.dropped_updates));
    r.detail.emplace_back("preempted", static_cast<double>(s.preempted_updates));
    for (std::size_t l = 0; l < s.per_hop.size(); ++l) {
        const auto& h = s.per_hop[l];
        r.detail.emplace_back(fmt::format("mean_residual_hop{}", l + 1), h.mean_residual);
        r.detail.emplace_back(fmt::format("var_cycle_hop{}", l + 1), h.var_cycle);
        r.detail.emplace_back(fmt::format("mean_cycles_between_hop{}", l + 1), h.mean_cycles_between);
    }
}

std::vector<Row> eval_simulate(const ExperimentSpec& spec)
{
    const auto s = simulate(sim_config_of(spec));
    Row r = base_row(spec, spec.mode == SimMode::full_tree ? "sim_age_full" : "sim_age_tagged");
    r.value = s.avg_age;
    r.ci_halfwidth = s.ci_halfwidth;
    add_sim_detail(r, s);
    return {r};
}

Row check_row(const ExperimentSpec& spec, const std::string& name, const SimResult& s, double analytic, bool pass)
{
    Row r = base_row(spec, "check_" + name);
    r.value = s.avg_age;
    r.ci_halfwidth = s.ci_halfwidth;
    r.status = pass ? "pass" : "fail";
    r.detail.emplace_back("analytic", analytic);
    r.detail.emplace_back("std_error", s.std_error);
    return r;
}

bool covers(const SimResult& s, double analytic)
{
    return std::abs(s.avg_age - analytic) <= s.ci_halfwidth;
}

std::vector<Row> eval_validate(const ExperimentSpec& spec)
{
    const auto net = network_of(spec);
    const auto kind = arrival_kind(spec);
    const auto s = simulate(sim_config_of(spec));
    const auto& last = s.per_hop.back();
    const InterarrivalMoments z_last{last.mean_residual, last.var_cycle};

    std::vector<Row> rows;
    const double hybrid = age_L_hop_exact(net, z_last).total;
    rows.push_back(check_row(spec, "hybrid_exact", s, hybrid, covers(s, hybrid)));

    if (kind == ArrivalModel::Kind::poisson) {
        const double cor = age_building_block_poisson(net.hops[0], *spec.mu).total;
        rows.push_back(check_row(spec, "poisson_building_block", s, cor, covers(s, cor)));
    }
    if (kind == ArrivalModel::Kind::generate_at_will) {
        const double upper = age_L_hop_upper(net).total;
        if (net.depth() == 1) {
            rows.push_back(check_row(spec, "single_hop", s, upper, covers(s, upper)));
        } else {
            rows.push_back(check_row(spec, "upper_bound_order", s, upper, s.avg_age <= upper + 3.0 * s.std_error));
        }
    }

    // Cycles between deliveries to a tagged child at the last hop are geometric with mean n/k.
    const auto& hop = net.hops.back();
    const double expect_m = static_cast<double>(hop.n) / static_cast<double>(hop.k);
    const double se_m = last.receptions > 0 ? std::sqrt(last.var_cycles_between / static_cast<double>(last.receptions))
                                            : std::numeric_limits<double>::infinity();
    Row m = base_row(spec, "check_cycles_between");
    m.value = last.mean_cycles_between;
    m.ci_halfwidth = 3.0 * se_m;
    m.status = std::abs(last.mean_cycles_between - expect_m) <= 3.0 * se_m ? "pass" : "fail";
    m.detail.emplace_back("analytic", expect_m);
    rows.push_back(m);
    return rows;
}

std::vector<Row> eval_single(const ExperimentSpec& spec, Command command)
{
    switch (command) {
    case Command::age:
        return eval_age(spec);
    case Command::approx:
        return eval_approx(spec);
    case Command::optimize:
        return eval_optimize(spec);
    case Command::simulate:
        return eval_simulate(spec);
    case Command::validate:
        return eval_validate(spec);
    case Command::sweep:
        break;
    }
    throw SpecError("of", "sweep cannot be nested");
}

void validate_for(const ExperimentSpec& spec, Command command)
{
    if (spec.hops.empty()) {
        throw SpecError("hops", "at least one hop is required");
    }
    for (std::size_t l = 0; l < spec.hops.size(); ++l) {
        const auto& h = spec.hops[l];
        const std::string where = fmt::format("hop {}: ", l + 1);
        if (!(h.rate > 0.0)) {
            throw SpecError("hops", where + "lambda must be positive");
        }
        if (!(h.shift >= 0.0)) {
            throw SpecError("hops", where + "c must be non-negative");
        }
        if (h.n && *h.n == 0) {
            throw SpecError("hops", where + "n must be at least 1");
        }
        if (h.n && h.k && (*h.k < 1 || *h.k > *h.n)) {
            throw SpecError("hops", where + "k must lie in 1..n");
        }
    }

    const auto kind = arrival_kind(spec);
    if (spec.mu && !(*spec.mu > 0.0)) {
        throw SpecError("mu", "must be positive");
    }
    if (kind == ArrivalModel::Kind::poisson && !spec.mu) {
        throw SpecError("mu", "poisson arrivals need a rate");
    }
    if (kind == ArrivalModel::Kind::deterministic && !(spec.period && *spec.period > 0.0)) {
        throw SpecError("period", "deterministic arrivals need a positive period");
    }
    if (spec.z && !(spec.z->mean_residual >= 0.0 && spec.z->var_cycle >= 0.0)) {
        throw SpecError("z", "moments must be non-negative");
    }

    const bool exogenous = kind != ArrivalModel::Kind::generate_at_will;
    switch (command) {
    case Command::age:
        if (!all_exact(spec)) {
            throw SpecError("hops", "age needs n,k,lambda,c for every hop");
        }
        if (exogenous && !spec.z && !(kind == ArrivalModel::Kind::poisson && spec.hops.size() == 1)) {
            throw SpecError("arrival", "closed forms cover poisson arrivals at a single hop; pass --z otherwise");
        }
        break;
    case Command::approx:
        if (spec.alpha.size() != spec.hops.size()) {
            throw SpecError("alpha", fmt::format("need {} ratios, got {}", spec.hops.size(), spec.alpha.size()));
        }
        for (double a : spec.alpha) {
            if (!(a > 0.0 && a < 1.0)) {
                throw SpecError("alpha", "ratios must lie strictly between 0 and 1");
            }
        }
        [[fallthrough]];
    case Command::optimize:
        if (command == Command::optimize && !all_have_n(spec) && !none_have_n(spec)) {
            throw SpecError("hops", "give n for every hop (integer search) or for none (ratio search)");
        }
        if (kind == ArrivalModel::Kind::deterministic) {
            throw SpecError("arrival", "no closed form for deterministic arrivals");
        }
        if (kind == ArrivalModel::Kind::poisson && spec.hops.size() != 1) {
            throw SpecError("arrival", "poisson arrivals are modelled for a single hop");
        }
        break;
    case Command::simulate:
    case Command::validate:
        if (!all_exact(spec)) {
            throw SpecError("hops", "simulation needs n,k,lambda,c for every hop");
        }
        if (spec.cycles == 0) {
            throw SpecError("cycles", "must be positive");
        }
        if (spec.warmup && *spec.warmup >= spec.cycles) {
            throw SpecError("warmup", "must be smaller than --cycles");
        }
        if (spec.batches < 2) {
            throw SpecError("batches", "need at least 2 batches");
        }
        if (spec.cycles < spec.batches) {
            throw SpecError("batches", "more batches than cycles");
        }
        break;
    case Command::sweep:
        throw SpecError("of", "sweep cannot be nested");
    }
}

} // namespace

Command parse_command(const std::string& s)
{
    static const std::pair<const char*, Command> names[] = {
        {"age", Command::age},           {"approx", Command::approx}, {"optimize", Command::optimize},
        {"simulate", Command::simulate}, {"sweep", Command::sweep},   {"validate", Command::validate},
    };
    for (const auto& [name, c] : names) {
        if (s == name) {
            return c;
        }
    }
    throw SpecError("command", "unknown command '" + s + "'");
}

const char* to_string(Command c) noexcept
{
    switch (c) {
    case Command::age:
        return "age";
    case Command::approx:
        return "approx";
    case Command::optimize:
        return "optimize";
    case Command::simulate:
        return "simulate";
    case Command::sweep:
        return "sweep";
    case Command::validate:
        return "validate";
    }
    return "unknown";
}

OutputFormat parse_output(const std::string& s)
{
    if (s == "csv") {
        return OutputFormat::csv;
    }
    if (s == "json") {
        return OutputFormat::json;
    }
    throw SpecError("output", "expected csv or json, got '" + s + "'");
}

ArrivalModel::Kind parse_arrival(const std::string& s)
{
    if (s == "will") {
        return ArrivalModel::Kind::generate_at_will;
    }
    if (s == "poisson") {
        return ArrivalModel::Kind::poisson;
    }
    if (s == "deterministic") {
        return ArrivalModel::Kind::deterministic;
    }
    throw SpecError("arrival", "expected will, poisson or deterministic, got '" + s + "'");
}

SimMode parse_mode(const std::string& s)
{
    if (s == "full") {
        return SimMode::full_tree;
    }
    if (s == "tagged") {
        return SimMode::tagged_path;
    }
    throw SpecError("mode", "expected full or tagged, got '" + s + "'");
}

std::vector<HopSpec> parse_hops(const std::vector<std::string>& items)
{
    std::vector<HopSpec> hops;
    for (const auto& item : items) {
        for (const auto& tuple : split(item, ';')) {
            if (tuple.empty()) {
                continue;
            }
            const auto f = split(tuple, ',');
            HopSpec h;
            switch (f.size()) {
            case 4:
                h.n = to_count(f[0], "hops");
                h.k = to_count(f[1], "hops");
                h.rate = to_double(f[2], "hops");
                h.shift = to_double(f[3], "hops");
                break;
            case 3:
                h.n = to_count(f[0], "hops");
                h.rate = to_double(f[1], "hops");
                h.shift = to_double(f[2], "hops");
                break;
            case 2:
                h.rate = to_double(f[0], "hops");
                h.shift = to_double(f[1], "hops");
                break;
            default:
                throw SpecError("hops", "expected n,k,lambda,c or n,lambda,c or lambda,c, got '" + tuple + "'");
            }
            hops.push_back(h);
        }
    }
    return hops;
}

std::vector<double> parse_alpha(const std::string& s)
{
    std::vector<double> out;
    for (const auto& part : split(s, ',')) {
        out.push_back(to_double(part, "alpha"));
    }
    return out;
}

InterarrivalMoments parse_z(const std::string& s)
{
    const auto f = split(s, ',');
    if (f.size() != 2) {
        throw SpecError("z", "expected mean_residual,var_cycle");
    }
    return {to_double(f[0], "z"), to_double(f[1], "z")};
}

SweepSpec parse_sweep(const std::string& s)
{
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
        throw SpecError("sweep", "expected <var>=<start>:<end>:<step>");
    }
    const auto range = split(std::string_view(s).substr(eq + 1), ':');
    if (range.size() != 3) {
        throw SpecError("sweep", "expected <var>=<start>:<end>:<step>");
    }
    SweepSpec out{trim(std::string_view(s).substr(0, eq)), to_double(range[0], "sweep"), to_double(range[1], "sweep"),
                  to_double(range[2], "sweep")};
    if (!(out.step > 0.0)) {
        throw SpecError("sweep", "step must be positive");
    }
    if (out.end < out.start) {
        throw SpecError("sweep", "end lies before start");
    }
    return out;
}

std::vector<double> sweep_values(const SweepSpec& sweep)
{
    const double span = (sweep.end - sweep.start) / sweep.step;
    if (span > 1e7) {
        throw SpecError("sweep", "more than 10^7 points");
    }
    const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = sweep.start + sweep.step * static_cast<double>(i);
    }
    return out;
}

ExperimentSpec with_variable(const ExperimentSpec& spec, const std::string& variable, double value)
{
    ExperimentSpec out = spec;
    if (variable == "mu") {
        out.mu = value;
        return out;
    }
    if (variable == "n") {
        for (auto& h : out.hops) {
            h.n = as_count(value, "sweep");
        }
        return out;
    }
    static const char* prefixes[] = {"alpha", "lambda", "k", "c"};
    for (const char* p : prefixes) {
        const std::string prefix = p;
        if (variable.rfind(prefix, 0) != 0 || variable.size() == prefix.size()) {
            continue;
        }
        const auto hop = to_count(variable.substr(prefix.size()), "sweep");
        if (hop < 1 || hop > out.hops.size()) {
            throw SpecError("sweep", fmt::format("'{}' names hop {} but there are {} hops", variable, hop,
                                                 out.hops.size()));
        }
        auto& h = out.hops[hop - 1];
        if (prefix == "alpha") {
            if (out.alpha.size() != out.hops.size()) {
                throw SpecError("alpha", "sweeping a ratio needs --alpha for every hop");
            }
            out.alpha[hop - 1] = value;
        } else if (prefix == "lambda") {
            h.rate = value;
        } else if (prefix == "k") {
            h.k = as_count(value, "sweep");
        } else {
            h.shift = value;
        }
        return out;
    }
    throw SpecError("sweep", "unknown variable '" + variable + "' (use k<l>, alpha<l>, lambda<l>, c<l>, mu or n)");
}

ArrivalModel::Kind arrival_kind(const ExperimentSpec& spec)
{
    if (spec.arrival) {
        return *spec.arrival;
    }
    return spec.mu ? ArrivalModel::Kind::poisson : ArrivalModel::Kind::generate_at_will;
}

void validate(const ExperimentSpec& spec)
{
    if (spec.command != Command::sweep) {
        validate_for(spec, spec.command);
        return;
    }
    if (!spec.sweep) {
        throw SpecError("sweep", "sweep needs --sweep <var>=<start>:<end>:<step>");
    }
    if (spec.sweep_of == Command::sweep) {
        throw SpecError("of", "sweep cannot be nested");
    }
    for (double v : sweep_values(*spec.sweep)) {
        validate_for(with_variable(spec, spec.sweep->variable, v), spec.sweep_of);
    }
}

NetworkConfig network_of(const ExperimentSpec& spec)
{
    NetworkConfig net;
    for (const auto& h : spec.hops) {
        if (!h.n || !h.k) {
            throw SpecError("hops", "every hop needs n and k here");
        }
        net.hops.push_back({*h.n, *h.k, ShiftedExp(h.rate, h.shift)});
    }
    return net;
}

SimConfig sim_config_of(const ExperimentSpec& spec)
{
    SimConfig cfg;
    cfg.network = network_of(spec);
    cfg.cycles = spec.cycles;
    cfg.warmup_cycles = spec.warmup ? *spec.warmup : spec.cycles / 10;
    cfg.seed = spec.seed;
    cfg.mode = spec.mode;
    cfg.batches = spec.batches;
    switch (arrival_kind(spec)) {
    case ArrivalModel::Kind::generate_at_will:
        cfg.arrivals = ArrivalModel::will();
        break;
    case ArrivalModel::Kind::poisson:
        cfg.arrivals = ArrivalModel::poisson(*spec.mu);
        break;
    case ArrivalModel::Kind::deterministic:
        cfg.arrivals = ArrivalModel::every(*spec.period);
        break;
    }
    return cfg;
}

std::vector<Row> evaluate(const ExperimentSpec& spec)
{
    validate(spec);
    if (spec.command != Command::sweep) {
        return eval_single(spec, spec.command);
    }

    const auto values = sweep_values(*spec.sweep);
    const auto& var = spec.sweep->variable;
    auto per_point = parallel::map_omp(values.size(), [&](std::size_t i) {
        auto rows = eval_single(with_variable(spec, var, values[i]), spec.sweep_of);
        for (auto& r : rows) {
            r.sweep_var = var;
            r.sweep_value = values[i];
        }
        return rows;
    });

    std::vector<Row> rows;
    for (auto& p : per_point) {
        rows.insert(rows.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    }
    if (spec.sweep_of != Command::validate && !rows.empty()) {
        const auto best = parallel::argmin_serial(rows.size(), [&](std::size_t i) { return rows[i].value; });
        if (best.found) {
            rows[best.index].status = "min";
        }
    }
    return rows;
}

void write_csv(std::ostream& out, Command command, const std::vector<Row>& rows)
{
    out << "#schema=" << csv_schema_version << '\n';
    out << "index,command,quantity,hops,alpha,mu,arrival,sweep_var,sweep_value,value,ci_halfwidth,status,argmin,"
           "detail\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        std::string detail;
        for (const auto& [k, v] : r.detail) {
            if (!detail.empty()) {
                detail += ';';
            }
            detail += k + "=" + num(v);
        }
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", i, to_string(command), r.quantity, r.hops,
                           r.alpha, r.mu ? num(*r.mu) : "", r.arrival, r.sweep_var,
                           r.sweep_value ? num(*r.sweep_value) : "", num(r.value),
                           r.ci_halfwidth ? num(*r.ci_halfwidth) : "", r.status, join(r.argmin), detail);
    }
}

void write_json(std::ostream& out, Command command, const std::vector<Row>& rows)
{
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["schema"] = csv_schema_version;
    doc["command"] = to_string(command);
    doc["rows"] = ordered_json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        ordered_json j;
        j["index"] = i;
        j["quantity"] = r.quantity;
        j["hops"] = r.hops;
        j["alpha"] = r.alpha;
        j["mu"] = r.mu ? ordered_json(*r.mu) : ordered_json(nullptr);
        j["arrival"] = r.arrival;
        j["sweep_var"] = r.sweep_var;
        j["sweep_value"] = r.sweep_value ? ordered_json(*r.sweep_value) : ordered_json(nullptr);
        j["value"] = r.value;
        j["ci_halfwidth"] = r.ci_halfwidth ? ordered_json(*r.ci_halfwidth) : ordered_json(nullptr);
        j["status"] = r.status;
        j["argmin"] = r.argmin;
        ordered_json d = ordered_json::object();
        for (const auto& [k, v] : r.detail) {
            d[k] = v;
        }
        j["detail"] = d;
        doc["rows"].push_back(j);
    }
    out << doc.dump(2) << '\n';
}

int run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err)
{
    std::vector<Row> rows;
    try {
        rows = evaluate(spec);
    } catch (const SpecError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    // Render fully before writing so a failure never leaves half a file.
    std::ostringstream buf;
    if (spec.output == OutputFormat::json) {
        write_json(buf, spec.command, rows);
    } else {
        write_csv(buf, spec.command, rows);
    }
    out << buf.str();

    const bool failed = std::any_of(rows.begin(), rows.end(), [](const Row& r) { return r.status == "fail"; });
    return failed ? 2 : 0;
}

} // namespace aoi::cli
