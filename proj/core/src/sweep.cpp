#include "mtcagg/sweep.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "mtcagg/engine.hpp"
#include "mtcagg/error.hpp"

namespace mtcagg {
namespace {

const std::vector<std::uint32_t> kAggregatorGrid{1, 2, 5, 10, 20, 50, 100, 200, 500};

std::vector<std::uint32_t> with_benchmark(std::vector<std::uint32_t> grid) {
    grid.insert(grid.begin(), 0);
    return grid;
}

const std::vector<std::string> kPointColumns{"point", "num_mtds", "num_aggregators", "bundle_limit",
                                             "packet_rate_per_min"};

std::vector<std::string> metric_names() {
    std::vector<std::string> names;
    for (auto& [name, value] : metric_columns(MetricSummary{})) names.push_back(name);
    return names;
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << cells[i];
    }
    out << '\n';
}

std::vector<std::string> point_cells(const GridPoint& p) {
    return {std::to_string(p.index), std::to_string(p.config.num_mtds),
            std::to_string(p.config.num_aggregators), std::to_string(p.config.bundle_limit),
            format_number(p.packet_rate_per_min)};
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    MTCAGG_CHECK(ec == std::errc{}, "number formatting failed");
    return std::string(buf, end);
}

std::size_t SweepSpec::num_points() const noexcept {
    return num_mtds.size() * num_aggregators.size() * bundle_limits.size() * packet_rates_per_min.size();
}

std::vector<GridPoint> expand_grid(const SweepSpec& spec) {
    if (spec.num_mtds.empty()) throw ConfigError("num_mtds", "sweep axis num_mtds is empty");
    if (spec.num_aggregators.empty())
        throw ConfigError("num_aggregators", "sweep axis num_aggregators is empty");
    if (spec.bundle_limits.empty()) throw ConfigError("bundle_limit", "sweep axis bundle_limit is empty");
    if (spec.packet_rates_per_min.empty())
        throw ConfigError("packet_rate_per_min", "sweep axis packet_rate_per_min is empty");

    std::vector<GridPoint> points;
    for (auto m : spec.num_mtds)
        for (auto b : spec.bundle_limits)
            for (auto rate : spec.packet_rates_per_min)
                for (auto n : spec.num_aggregators) {
                    GridPoint p;
                    p.index = points.size();
                    p.config = spec.base;
                    p.config.num_mtds = m;
                    p.config.num_aggregators = n;
                    p.config.bundle_limit = b;
                    p.config.packet_rate_per_s = rate / 60.0;
                    p.packet_rate_per_min = rate;
                    p.config.validate();
                    points.push_back(std::move(p));
                }
    return points;
}

std::vector<std::string> preset_names() { return {"fig3a", "fig3b", "fig3c", "fig5", "fig6"}; }

SweepSpec preset(std::string_view name) {
    SweepSpec s;
    s.name = std::string(name);
    s.base.engine.num_repetitions = 10;
    s.num_aggregators = with_benchmark(kAggregatorGrid);
    if (name == "fig3a") {
        s.num_mtds = {1000, 3000, 5000};
        s.bundle_limits = {10};
        s.packet_rates_per_min = {1.0};
    } else if (name == "fig3b") {
        s.num_mtds = {5000};
        s.bundle_limits = {1, 10};
        s.packet_rates_per_min = {1.0};
    } else if (name == "fig3c") {
        s.num_mtds = {5000};
        s.bundle_limits = {1, 2, 5, 10};
        s.packet_rates_per_min = {3.0};
    } else if (name == "fig5") {
        s.num_mtds = {1000, 2000, 3000, 4000, 5000};
        s.bundle_limits = {1, 10};
        s.packet_rates_per_min = {1.0};
    } else if (name == "fig6") {
        s.num_mtds = {5000};
        s.num_aggregators = kAggregatorGrid;
        s.bundle_limits = {10};
        s.packet_rates_per_min = {1.0};
    } else {
        throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
    }
    return s;
}

const MeanCi& AggregateRow::metric(std::string_view name) const {
    for (const auto& [n, v] : metrics)
        if (n == name) return v;
    throw std::out_of_range("no metric named " + std::string(name));
}

AggregateRow aggregate_point(std::size_t point, std::span<const RawRow> rows) {
    AggregateRow agg;
    agg.point = point;
    std::vector<std::vector<std::pair<std::string, double>>> columns;
    for (const auto& r : rows)
        if (r.point == point) columns.push_back(metric_columns(r.summary));
    for (const auto& name : metric_names()) {
        std::vector<double> samples;
        for (const auto& cols : columns)
            for (const auto& [n, v] : cols)
                if (n == name) samples.push_back(v);
        agg.metrics.emplace_back(name, mean_ci(samples));
    }
    return agg;
}

SweepResult run_sweep(const SweepSpec& spec, unsigned workers, RunObserver observer) {
    SweepResult result;
    result.points = expand_grid(spec);
    const std::uint32_t reps = spec.repetitions();
    const std::size_t jobs = result.points.size() * reps;
    result.raw.resize(jobs);

    std::atomic<std::size_t> next{0};
    std::mutex mutex;
    std::exception_ptr failure;
    std::size_t failed_job = SIZE_MAX;

    auto worker = [&] {
        while (true) {
            const std::size_t job = next.fetch_add(1);
            if (job >= jobs) return;
            const auto& point = result.points[job / reps];
            const auto rep = static_cast<std::uint32_t>(job % reps);
            const auto seed = derive_run_seed(spec.base.engine.master_seed, rep);
            try {
                RunResult run_result = run(point.config, seed);
                result.raw[job] = RawRow{point.index, rep, seed, summarize(run_result)};
                if (observer) {
                    std::lock_guard lock(mutex);
                    observer(point, rep, run_result);
                }
            } catch (...) {
                std::lock_guard lock(mutex);
                if (job < failed_job) {
                    failed_job = job;
                    failure = std::current_exception();
                }
                next.store(jobs);
                return;
            }
        }
    };

    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs)));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    }

    if (failure) {
        const auto point = failed_job / reps;
        const auto seed = derive_run_seed(spec.base.engine.master_seed, failed_job % reps);
        std::string what;
        try {
            std::rethrow_exception(failure);
        } catch (const std::exception& e) {
            what = e.what();
        }
        std::ostringstream os;
        os << "run failed at point " << point << " (M=" << result.points[point].config.num_mtds
           << ", N=" << result.points[point].config.num_aggregators
           << ", B=" << result.points[point].config.bundle_limit << ") seed " << seed << ": " << what;
        throw SweepError(point, seed, os.str());
    }

    for (const auto& p : result.points) result.aggregate.push_back(aggregate_point(p.index, result.raw));
    return result;
}

std::vector<std::string> raw_csv_header() {
    std::vector<std::string> h = kPointColumns;
    h.insert(h.begin() + 1, {"repetition", "seed"});
    for (auto& m : metric_names()) h.push_back(m);
    return h;
}

std::vector<std::string> aggregate_csv_header() {
    std::vector<std::string> h = kPointColumns;
    h.push_back("repetitions");
    for (auto& m : metric_names()) {
        h.push_back(m + "_mean");
        h.push_back(m + "_ci95");
    }
    return h;
}

void write_raw_csv(std::ostream& out, const SweepResult& result) {
    write_row(out, raw_csv_header());
    for (const auto& r : result.raw) {
        const auto& p = result.points[r.point];
        auto cells = point_cells(p);
        cells.insert(cells.begin() + 1, {std::to_string(r.repetition), std::to_string(r.seed)});
        for (auto& [name, v] : metric_columns(r.summary)) cells.push_back(format_number(v));
        write_row(out, cells);
    }
}

void write_aggregate_csv(std::ostream& out, const SweepResult& result) {
    write_row(out, aggregate_csv_header());
    for (const auto& a : result.aggregate) {
        const auto& p = result.points[a.point];
        auto cells = point_cells(p);
        cells.push_back(std::to_string(p.config.engine.num_repetitions));
        for (auto& [name, m] : a.metrics) {
            cells.push_back(format_number(m.mean));
            cells.push_back(format_number(m.half_width));
        }
        write_row(out, cells);
    }
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result) {
    std::filesystem::create_directories(dir);
    auto open = [](const std::filesystem::path& path) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        return f;
    };
    {
        auto f = open(dir / "raw.csv");
        write_raw_csv(f, result);
        if (!f) throw std::runtime_error("write error on raw.csv");
    }
    {
        auto f = open(dir / "aggregate.csv");
        write_aggregate_csv(f, result);
        if (!f) throw std::runtime_error("write error on aggregate.csv");
    }
}

std::size_t check_csv_schema(std::istream& in, CsvKind kind) {
    const auto header = kind == CsvKind::raw ? raw_csv_header() : aggregate_csv_header();
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("missing header");
    const auto got = split_csv_line(line);
    if (got != header) {
        for (std::size_t i = 0; i < std::max(got.size(), header.size()); ++i) {
            if (i >= got.size()) throw SchemaError("missing column '" + header[i] + "'");
            if (i >= header.size()) throw SchemaError("unexpected column '" + got[i] + "'");
            if (got[i] != header[i])
                throw SchemaError("column " + std::to_string(i) + ": expected '" + header[i] +
                                  "', found '" + got[i] + "'");
        }
    }

    auto is_fraction = [](const std::string& col) {
        return col == "outage" || col == "outage_mean";
    };
    auto may_be_negative = [](const std::string&) { return false; };

    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw SchemaError("row " + std::to_string(rows) + ": " + std::to_string(cells.size()) +
                              " cells, expected " + std::to_string(header.size()));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto& c = cells[i];
            if (c == "nan") continue;
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc{} || ptr != c.data() + c.size())
                throw SchemaError("row " + std::to_string(rows) + ", column '" + header[i] +
                                  "': not a number: '" + c + "'");
            if (!std::isfinite(v))
                throw SchemaError("row " + std::to_string(rows) + ", column '" + header[i] + "': not finite");
            if (v < 0 && !may_be_negative(header[i]))
                throw SchemaError("row " + std::to_string(rows) + ", column '" + header[i] + "': negative");
            if (is_fraction(header[i]) && v > 1.0)
                throw SchemaError("row " + std::to_string(rows) + ", column '" + header[i] + "': exceeds 1");
        }
    }
    return rows;
}

}  // namespace mtcagg
