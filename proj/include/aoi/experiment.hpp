#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aoi/analytic.hpp"
#include "aoi/simulator.hpp"

namespace aoi::cli {

/// Bad user input; field() names the offending flag or config key.
class SpecError : public std::runtime_error {
public:
    SpecError(std::string field, const std::string& what)
        : std::runtime_error("--" + field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class Command { age, approx, optimize, simulate, sweep, validate };
enum class OutputFormat { csv, json };

/// One --hops tuple: "n,k,lambda,c", "n,lambda,c" (threshold left to the optimizer)
/// or "lambda,c" (large-n forms).
struct HopSpec {
    std::optional<std::size_t> n;
    std::optional<std::size_t> k;
    double rate = 1.0;
    double shift = 0.0;
};

struct SweepSpec {
    std::string variable; ///< k<l>, alpha<l>, lambda<l>, c<l>, mu or n (hops are 1-based)
    double start = 0.0;
    double end = 0.0;
    double step = 1.0;
};

struct ExperimentSpec {
    Command command = Command::age;
    std::vector<HopSpec> hops;
    std::vector<double> alpha;
    std::optional<double> mu;
    std::optional<ArrivalModel::Kind> arrival; ///< unset: poisson when mu is given, else generate-at-will
    std::optional<double> period;
    std::optional<InterarrivalMoments> z;
    std::uint64_t cycles = 100'000;
    std::optional<std::uint64_t> warmup; ///< defaults to 10% of cycles
    std::size_t batches = 30;
    std::uint64_t seed = 1;
    SimMode mode = SimMode::tagged_path;
    std::optional<SweepSpec> sweep;
    Command sweep_of = Command::age;
    OutputFormat output = OutputFormat::csv;
};

Command parse_command(const std::string& s);
const char* to_string(Command c) noexcept;
OutputFormat parse_output(const std::string& s);
ArrivalModel::Kind parse_arrival(const std::string& s);
SimMode parse_mode(const std::string& s);

/// Accepts one tuple per element; an element may also hold several tuples separated by ';'.
std::vector<HopSpec> parse_hops(const std::vector<std::string>& items);
std::vector<double> parse_alpha(const std::string& s);
InterarrivalMoments parse_z(const std::string& s);
/// "<var>=<start>:<end>:<step>"
SweepSpec parse_sweep(const std::string& s);

/// Sweep grid start, start+step, ... up to end inclusive (within 1e-9 step).
std::vector<double> sweep_values(const SweepSpec& sweep);

/// Copy of spec with one variable overridden.
ExperimentSpec with_variable(const ExperimentSpec& spec, const std::string& variable, double value);

/// Throws SpecError if the spec cannot run.
void validate(const ExperimentSpec& spec);

ArrivalModel::Kind arrival_kind(const ExperimentSpec& spec);
NetworkConfig network_of(const ExperimentSpec& spec);
SimConfig sim_config_of(const ExperimentSpec& spec);

/// One output row. Columns are fixed by the CSV schema.
struct Row {
    std::string quantity;
    std::string hops;
    std::string alpha;
    std::optional<double> mu;
    std::string arrival;
    std::string sweep_var;
    std::optional<double> sweep_value;
    double value = 0.0;
    std::optional<double> ci_halfwidth;
    std::string status;
    std::vector<double> argmin;
    std::vector<std::pair<std::string, double>> detail;
};

inline constexpr int csv_schema_version = 1;

/// Rows for a spec (no I/O). Sweep rows come back in sweep-index order.
std::vector<Row> evaluate(const ExperimentSpec& spec);

void write_csv(std::ostream& out, Command command, const std::vector<Row>& rows);
void write_json(std::ostream& out, Command command, const std::vector<Row>& rows);

/// Runs the experiment and writes rows to out. Returns 0 on success, 1 on
/// input error (diagnostic to err), 2 when a validate check fails.
int run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

} // namespace aoi::cli
