// mtcsim: run a sweep of the uplink MTC simulator and write CSV results.

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mtcagg/engine.hpp"
#include "mtcagg/error.hpp"
#include "mtcagg/scenario.hpp"
#include "mtcagg/spatial.hpp"
#include "mtcagg/sweep.hpp"

namespace {

using namespace mtcagg;

template <typename T>
std::vector<T> parse_list(const std::string& flag, const std::string& text) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        T v{};
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size())
            throw ConfigError(flag, "bad list element '" + item + "' in " + flag);
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(flag, flag + " needs at least one value");
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, auto&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    writer(out);
    if (!out) throw std::runtime_error("write error on " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator of LTE uplink MTC with aggregators and packet bundling"};
    app.set_version_flag("--version", "mtcsim 0.1.0");

    std::string config_path;
    std::string preset_name;
    std::vector<std::string> overrides;
    std::uint32_t reps = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned workers = 1;
    std::string out_dir = "out";
    std::string grid_m, grid_n, grid_b, grid_rate;
    bool want_topology = false, want_trace = false, want_run_json = false;
    bool dry_run = false, list_presets = false, quiet = false;

    app.add_option("--config", config_path, "Scenario JSON file")->check(CLI::ExistingFile);
    app.add_option("--preset", preset_name, "Named sweep (see --list-presets)");
    app.add_option("--set", overrides, "Override one field: key=value (repeatable)")->take_all();
    app.add_option("--reps", reps, "Repetitions per grid point")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "Master seed");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--grid-m", grid_m, "Comma-separated MTD counts");
    app.add_option("--grid-n", grid_n, "Comma-separated aggregator counts (0 = direct access)");
    app.add_option("--grid-b", grid_b, "Comma-separated bundle limits");
    app.add_option("--grid-rate-per-min", grid_rate, "Comma-separated packet rates per MTD per minute");
    app.add_flag("--topology", want_topology, "Write topology.csv for the first point, repetition 0");
    app.add_flag("--trace", want_trace, "Write trace.csv for the first point, repetition 0");
    app.add_flag("--run-json", want_run_json, "Write run.json for the first point, repetition 0");
    app.add_flag("--dry-run", dry_run, "Print the grid and run count, then exit");
    app.add_flag("--list-presets", list_presets, "List preset names and exit");
    app.add_flag("-q,--quiet", quiet, "Only print errors");

    CLI11_PARSE(app, argc, argv);
    seed_given = seed_opt->count() > 0;

    try {
        if (list_presets) {
            for (const auto& n : preset_names()) std::cout << n << '\n';
            return 0;
        }

        SweepSpec spec;
        if (!preset_name.empty()) spec = preset(preset_name);
        if (!config_path.empty()) {
            const auto axes = spec;
            spec.base = load_config(read_file(config_path));
            if (preset_name.empty()) {
                spec.num_mtds = {spec.base.num_mtds};
                spec.num_aggregators = {spec.base.num_aggregators};
                spec.bundle_limits = {spec.base.bundle_limit};
                spec.packet_rates_per_min = {spec.base.packet_rate_per_s * 60.0};
            } else if (spec.base.engine.num_repetitions == 1) {
                spec.base.engine.num_repetitions = axes.base.engine.num_repetitions;
            }
        }

        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0)
                throw ConfigError(kv, "--set expects key=value, got '" + kv + "'");
            const std::string key = kv.substr(0, eq);
            const std::string value = kv.substr(eq + 1);
            apply_override(spec.base, key, value);
            if (key == "num_mtds") spec.num_mtds = {spec.base.num_mtds};
            else if (key == "num_aggregators") spec.num_aggregators = {spec.base.num_aggregators};
            else if (key == "bundle_limit") spec.bundle_limits = {spec.base.bundle_limit};
            else if (key == "packet_rate_per_s" || key == "packet_rate_per_min")
                spec.packet_rates_per_min = {spec.base.packet_rate_per_s * 60.0};
        }

        if (!grid_m.empty()) spec.num_mtds = parse_list<std::uint32_t>("--grid-m", grid_m);
        if (!grid_n.empty()) spec.num_aggregators = parse_list<std::uint32_t>("--grid-n", grid_n);
        if (!grid_b.empty()) spec.bundle_limits = parse_list<std::uint32_t>("--grid-b", grid_b);
        if (!grid_rate.empty()) spec.packet_rates_per_min = parse_list<double>("--grid-rate-per-min", grid_rate);
        if (reps > 0) spec.base.engine.num_repetitions = reps;
        if (seed_given) spec.base.engine.master_seed = seed;

        if (spec.num_mtds.empty() && spec.num_aggregators.empty())
            throw ConfigError("config", "nothing to run: give --config, --preset, or --set/--grid-* values");
        if (spec.num_mtds.empty()) spec.num_mtds = {spec.base.num_mtds};
        if (spec.num_aggregators.empty()) spec.num_aggregators = {spec.base.num_aggregators};
        if (spec.bundle_limits.empty()) spec.bundle_limits = {spec.base.bundle_limit};
        if (spec.packet_rates_per_min.empty())
            spec.packet_rates_per_min = {spec.base.packet_rate_per_s * 60.0};

        const auto points = expand_grid(spec);
        if (!quiet || dry_run)
            std::cout << "sweep " << spec.name << ": " << points.size() << " points x "
                      << spec.repetitions() << " repetitions = " << spec.total_runs() << " runs\n";
        if (dry_run) {
            for (const auto& p : points)
                std::cout << "  point " << p.index << ": M=" << p.config.num_mtds
                          << " N=" << p.config.num_aggregators << " B=" << p.config.bundle_limit
                          << " rate/min=" << format_number(p.packet_rate_per_min) << '\n';
            return 0;
        }

        const std::filesystem::path out(out_dir);
        std::filesystem::create_directories(out);

        if (want_topology || want_trace || want_run_json) {
            RunArtifacts artifacts;
            const auto first = run(points.front().config,
                                   derive_run_seed(spec.base.engine.master_seed, 0), artifacts);
            if (want_topology)
                write_file(out / "topology.csv", [&](std::ostream& f) { write_topology_csv(f, artifacts.topology); });
            if (want_trace)
                write_file(out / "trace.csv", [&](std::ostream& f) { write_trace_csv(f, artifacts.trace); });
            if (want_run_json)
                write_file(out / "run.json", [&](std::ostream& f) { f << to_json(first) << '\n'; });
        }

        std::size_t done = 0;
        const auto start = std::chrono::steady_clock::now();
        RunObserver progress;
        if (!quiet)
            progress = [&](const GridPoint&, std::uint32_t, const RunResult&) {
                ++done;
                if (done % 10 == 0 || done == spec.total_runs())
                    std::cerr << "\r" << done << "/" << spec.total_runs() << " runs" << std::flush;
            };
        const auto result = run_sweep(spec, workers, progress);
        if (!quiet) std::cerr << '\n';

        write_sweep_outputs(out, result);
        write_file(out / "config.json", [&](std::ostream& f) { f << serialize_config(spec.base) << '\n'; });
        if (!quiet) {
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            std::cout << "wrote " << (out / "raw.csv").string() << " and "
                      << (out / "aggregate.csv").string() << " in " << secs << " s\n";
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "mtcsim: configuration error (" << e.field() << "): " << e.what() << '\n';
        return 2;
    } catch (const SweepError& e) {
        std::cerr << "mtcsim: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "mtcsim: " << e.what() << '\n';
        return 1;
    }
}
