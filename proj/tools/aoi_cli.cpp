// Thin flag/config front-end; everything numeric happens in aoi::cli::run.
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoi/experiment.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Age of information in multicast trees with earliest-k stopping"};
    app.set_config("--config", "", "Read flags from a key = value file; command-line flags win");
    app.allow_config_extras(false);

    std::string command;
    std::vector<std::string> hops;
    std::string alpha, arrival, mode = "tagged", sweep, of = "age", output = "csv", out_path, z;
    std::optional<double> mu, period;
    std::uint64_t cycles = 100'000, seed = 1;
    std::optional<std::uint64_t> warmup;
    std::size_t batches = 30;

    app.add_option("command,--command", command, "age | approx | optimize | simulate | sweep | validate")
        ->required();
    app.add_option("--hops", hops, "Per-hop n,k,lambda,c (or n,lambda,c / lambda,c); repeat or separate with ';'");
    app.add_option("--alpha", alpha, "Comma-separated ratios k/n per hop");
    app.add_option("--mu", mu, "Poisson arrival rate at the root");
    app.add_option("--arrival", arrival, "will | poisson | deterministic");
    app.add_option("--period", period, "Interarrival time for deterministic arrivals");
    app.add_option("--z", z, "Last-hop residual moments mean_residual,var_cycle for the exact age");
    app.add_option("--cycles", cycles, "Source updates to simulate");
    app.add_option("--warmup", warmup, "Updates discarded before measuring (default: cycles/10)");
    app.add_option("--batches", batches, "Batches for the batch-means interval");
    app.add_option("--seed", seed, "Simulation seed");
    app.add_option("--mode", mode, "full | tagged");
    app.add_option("--sweep", sweep, "<var>=<start>:<end>:<step>, var in k<l>, alpha<l>, lambda<l>, c<l>, mu, n");
    app.add_option("--of", of, "Command evaluated at each sweep point");
    app.add_option("--output", output, "csv | json");
    app.add_option("--out", out_path, "Write to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help exits 0; every other parse problem is an input error.
        return app.exit(e) == 0 ? 0 : 1;
    }

    aoi::cli::ExperimentSpec spec;
    try {
        spec.command = aoi::cli::parse_command(command);
        spec.hops = aoi::cli::parse_hops(hops);
        if (!alpha.empty()) {
            spec.alpha = aoi::cli::parse_alpha(alpha);
        }
        spec.mu = mu;
        if (!arrival.empty()) {
            spec.arrival = aoi::cli::parse_arrival(arrival);
        }
        spec.period = period;
        if (!z.empty()) {
            spec.z = aoi::cli::parse_z(z);
        }
        spec.cycles = cycles;
        spec.warmup = warmup;
        spec.batches = batches;
        spec.seed = seed;
        spec.mode = aoi::cli::parse_mode(mode);
        if (!sweep.empty()) {
            spec.sweep = aoi::cli::parse_sweep(sweep);
        }
        spec.sweep_of = aoi::cli::parse_command(of);
        spec.output = aoi::cli::parse_output(output);
    } catch (const aoi::cli::SpecError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    if (out_path.empty()) {
        return aoi::cli::run(spec, std::cout, std::cerr);
    }
    std::ofstream file(out_path, std::ios::binary);
    if (!file) {
        std::cerr << "error: --out: cannot open '" << out_path << "'\n";
        return 1;
    }
    return aoi::cli::run(spec, file, std::cerr);
}
