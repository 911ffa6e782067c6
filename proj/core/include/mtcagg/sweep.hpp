#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mtcagg/engine.hpp"
#include "mtcagg/metrics.hpp"
#include "mtcagg/scenario.hpp"

namespace mtcagg {

/// A batch of runs over the Cartesian product of the axes. Every point uses
/// the repetition seeds derived from `base.engine.master_seed`, so points
/// are compared on common random numbers.
struct SweepSpec {
    std::string name = "custom";
    ScenarioConfig base;
    std::vector<std::uint32_t> num_mtds;
    std::vector<std::uint32_t> num_aggregators;
    std::vector<std::uint32_t> bundle_limits;
    std::vector<double> packet_rates_per_min;
    std::filesystem::path output_dir;

    std::uint32_t repetitions() const noexcept { return base.engine.num_repetitions; }
    std::size_t num_points() const noexcept;
    std::size_t total_runs() const noexcept { return num_points() * repetitions(); }
};

struct GridPoint {
    std::size_t index = 0;
    ScenarioConfig config;
    double packet_rate_per_min = 0.0;
};

/// Points ordered by M, then B, then packet rate, then N (innermost).
/// Throws ConfigError if any point is invalid or an axis is empty.
std::vector<GridPoint> expand_grid(const SweepSpec& spec);

/// Names accepted by `preset()`.
std::vector<std::string> preset_names();

/// Named sweeps:
///   fig3a  M in {1000,3000,5000}, 1 packet/min, B = 10
///   fig3b  M = 5000, 1 packet/min, B in {1,10}
///   fig3c  M = 5000, 3 packets/min, B in {1,2,5,10}
///   fig5   M in {1000..5000}, 1 packet/min, B in {1,10}
///   fig6   M = 5000, 1 packet/min, B = 10
/// N spans {1,2,5,...,500}, plus the N = 0 benchmark except for fig6.
/// Throws ConfigError for an unknown name.
SweepSpec preset(std::string_view name);

struct RawRow {
    std::size_t point = 0;
    std::uint32_t repetition = 0;
    std::uint64_t seed = 0;
    MetricSummary summary;
};

struct AggregateRow {
    std::size_t point = 0;
    std::vector<std::pair<std::string, MeanCi>> metrics;

    const MeanCi& metric(std::string_view name) const;
};

struct SweepResult {
    std::vector<GridPoint> points;
    std::vector<RawRow> raw;
    std::vector<AggregateRow> aggregate;
};

/// A run inside a sweep violated an invariant.
class SweepError : public std::runtime_error {
public:
    SweepError(std::size_t point, std::uint64_t seed, const std::string& what)
        : std::runtime_error(what), point_(point), seed_(seed) {}
    std::size_t point() const noexcept { return point_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::size_t point_;
    std::uint64_t seed_;
};

using RunObserver = std::function<void(const GridPoint&, std::uint32_t rep, const RunResult&)>;

/// Executes every (point, repetition) with up to `workers` threads. Output
/// order and content do not depend on the worker count. `observer`, if set,
/// sees every RunResult (called from worker threads, serialized).
SweepResult run_sweep(const SweepSpec& spec, unsigned workers = 1, RunObserver observer = {});

AggregateRow aggregate_point(std::size_t point, std::span<const RawRow> rows);

void write_raw_csv(std::ostream& out, const SweepResult& result);
void write_aggregate_csv(std::ostream& out, const SweepResult& result);

/// Writes raw.csv and aggregate.csv into `dir` (created if needed).
void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result);

/// Column names of raw.csv / aggregate.csv.
std::vector<std::string> raw_csv_header();
std::vector<std::string> aggregate_csv_header();

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CsvKind { raw, aggregate };

/// Strict check: exact header, constant column count, every cell numeric
/// (or `nan`), counts nonnegative and fractions within [0, 1]. Returns the
/// number of data rows.
std::size_t check_csv_schema(std::istream& in, CsvKind kind);

/// Shortest text that reads back to the same double (`nan` for NaN).
std::string format_number(double value);

}  // namespace mtcagg
