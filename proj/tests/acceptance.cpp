// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mtcagg/engine.hpp"
#include "mtcagg/error.hpp"
#include "mtcagg/metrics.hpp"
#include "mtcagg/protocol.hpp"
#include "mtcagg/rng.hpp"
#include "mtcagg/spatial.hpp"
#include "mtcagg/sweep.hpp"

using namespace mtcagg;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Mean of one metric per grid point, keyed by the point's config.
struct PointMeans {
    const GridPoint* point;
    const AggregateRow* row;
    double mean(std::string_view m) const { return row->metric(m).mean; }
};

std::vector<PointMeans> means(const SweepResult& r) {
    std::vector<PointMeans> out;
    for (std::size_t i = 0; i < r.points.size(); ++i) out.push_back({&r.points[i], &r.aggregate[i]});
    return out;
}

std::vector<double> samples(const SweepResult& r, std::size_t point, const std::function<double(const MetricSummary&)>& f) {
    std::vector<double> v;
    for (const auto& row : r.raw)
        if (row.point == point) v.push_back(f(row.summary));
    return v;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
}

double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}

double density_direct(double la, double lu) { return la * (1.0 - std::pow(1.0 + lu / (3.5 * la), -3.5)); }

Verdict a1() {
    double worst = 0.0;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            const double la = 1e-7 * std::pow(10.0, i * 0.4);
            const double lu = 1e-7 * std::pow(10.0, j * 0.45);
            const double ref = density_direct(la, lu);
            worst = std::max(worst, std::abs(active_aggregator_density(la, lu) - ref) / ref);
        }
    return {worst <= 1e-12, fmt("max relative error %.3g on 100 points", worst)};
}

Verdict a2() {
    ScenarioConfig c;
    c.num_mtds = 5000;
    c.num_aggregators = 100;
    c.packet_rate_per_s = 1.0 / 60;
    c.bundle_limit = 10;
    const double area = std::numbers::pi * c.cell_radius_m * c.cell_radius_m;
    double sum = 0.0;
    for (std::uint64_t s = 1; s <= 200; ++s) sum += empirical_active_fraction(deploy(c, s));
    const double emp = sum / 200;
    const double la = c.num_aggregators / area;
    const double model = active_aggregator_density(la, c.num_mtds / area) / la;
    return {std::abs(emp - model) <= 0.03, fmt("empirical %.4f, model %.4f", emp, model)};
}

Verdict a3() {
    const auto grid = expand_grid(preset("fig3a"));
    const auto& p = grid[grid.size() / 2];
    const auto a = to_json(run(p.config, 2024));
    const auto b = to_json(run(p.config, 2024));
    const auto h = std::hash<std::string>{}(a);
    return {a == b && h == std::hash<std::string>{}(b),
            fmt("M=%u N=%u serialization hash %016zx", p.config.num_mtds, p.config.num_aggregators, h)};
}

Verdict a4() {
    std::size_t runs = 0;
    std::string violation;
    for (const auto& name : preset_names()) {
        const auto spec = preset(name);
        try {
            run_sweep(spec, workers(), [&](const GridPoint& p, std::uint32_t rep, const RunResult& r) {
                ++runs;
                const auto& ph = r.config.phy;
                const bool conserved = r.generated() == r.delivered() + r.dropped() + r.buffered_at_end();
                const bool capacity = r.peak_usage.cces <= ph.cces_per_subframe &&
                                      r.peak_usage.dl_rbs <= ph.dl_rbs_per_subframe &&
                                      r.peak_usage.ul_rbs <= ph.ul_rbs_per_subframe;
                if ((!conserved || !capacity) && violation.empty())
                    violation = name + " point " + std::to_string(p.index) + " rep " + std::to_string(rep);
            });
        } catch (const std::exception& e) {
            if (violation.empty()) violation = name + ": " + e.what();
        }
    }
    if (!violation.empty()) return {false, "violation at " + violation};
    return {true, fmt("%zu runs over all presets", runs)};
}

Verdict a5() {
    Rng rng(5);
    std::string detail;
    bool ok = true;
    for (std::uint32_t c : {2u, 10u, 30u, 60u}) {
        std::vector<std::uint32_t> contenders(c);
        for (std::uint32_t i = 0; i < c; ++i) contenders[i] = i;
        std::vector<double> succ;
        for (int r = 0; r < 10000; ++r) {
            double s = 0;
            for (const auto& g : run_rach_round(contenders, 54, rng)) s += !g.collided();
            succ.push_back(s);
        }
        const double expected = c * std::pow(53.0 / 54.0, c - 1.0);
        const double m = mean_of(succ);
        const double sigma = std::sqrt(var_of(succ) / succ.size());
        ok = ok && std::abs(m - expected) <= 3 * sigma;
        detail += fmt("c=%u %.3f/%.3f ", c, m, expected);
    }
    return {ok, detail};
}

Verdict a6() {
    auto spec = preset("fig3a");
    spec.num_mtds = {5000};
    const auto r = run_sweep(spec, workers());
    std::map<std::uint32_t, double> tp;
    double benchmark = 0.0;
    for (const auto& pm : means(r)) {
        const auto n = pm.point->config.num_aggregators;
        if (n == 0)
            benchmark = pm.mean("throughput_bps");
        else
            tp[n] = pm.mean("throughput_bps");
    }
    const auto opt = find_optimal_n(tp);
    const bool ok = opt.throughput_bps > tp.at(1) && opt.throughput_bps > tp.at(500) &&
                    opt.throughput_bps > benchmark;
    return {ok, fmt("N*=%u tp*=%.0f tp(1)=%.0f tp(500)=%.0f tp(N=0)=%.0f", opt.num_aggregators,
                    opt.throughput_bps, tp.at(1), tp.at(500), benchmark)};
}

Verdict a7() {
    auto spec = preset("fig3c");
    spec.bundle_limits = {1, 10};
    const auto r = run_sweep(spec, workers());
    std::map<std::uint32_t, std::size_t> b1, b10;
    for (const auto& p : r.points)
        (p.config.bundle_limit == 1 ? b1 : b10)[p.config.num_aggregators] = p.index;
    auto outage_of = [](const MetricSummary& s) { return s.outage_fraction.value_or(0.0); };
    for (const auto& [n, idx] : b1) {
        if (n == 0) continue;
        const auto x = samples(r, idx, outage_of);
        if (mean_of(x) <= 0.2) continue;
        const auto y = samples(r, b10.at(n), outage_of);
        // Welch's t-test, two-sided at 5%.
        const double vx = var_of(x) / x.size(), vy = var_of(y) / y.size();
        const double t = (mean_of(x) - mean_of(y)) / std::sqrt(vx + vy);
        const double dof = (vx + vy) * (vx + vy) /
                           (vx * vx / (x.size() - 1) + vy * vy / (y.size() - 1));
        const double crit = student_t_975(static_cast<std::size_t>(std::max(1.0, std::floor(dof))));
        return {t > crit, fmt("N=%u outage B=1 %.4f B=10 %.4f Welch t=%.1f crit=%.2f", n, mean_of(x),
                              mean_of(y), t, crit)};
    }
    return {false, "no N with outage(B=1) > 0.2"};
}

Verdict a8() {
    auto spec = preset("fig5");
    spec.num_mtds = {1000, 3000, 5000};
    const auto r = run_sweep(spec, workers());
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::map<std::uint32_t, double>> tp;
    for (const auto& pm : means(r)) {
        const auto& c = pm.point->config;
        if (c.num_aggregators == 0) continue;
        tp[{c.num_mtds, c.bundle_limit}][c.num_aggregators] = pm.mean("throughput_bps");
    }
    bool ordered = true, nonincreasing = true;
    std::string detail;
    for (std::uint32_t b : {1u, 10u}) {
        double prev = INFINITY;
        for (std::uint32_t m : {1000u, 3000u, 5000u}) {
            const auto opt = find_optimal_n(tp.at({m, b}));
            nonincreasing = nonincreasing && opt.throughput_bps <= prev;
            prev = opt.throughput_bps;
            detail += fmt("B=%u M=%u N*=%u tp*=%.0f; ", b, m, opt.num_aggregators, opt.throughput_bps);
        }
    }
    for (std::uint32_t m : {1000u, 3000u, 5000u})
        ordered = ordered && find_optimal_n(tp.at({m, 10})).num_aggregators <=
                                 find_optimal_n(tp.at({m, 1})).num_aggregators;
    detail += fmt("N* ordered %s, tp* nonincreasing %s", ordered ? "yes" : "no", nonincreasing ? "yes" : "no");
    return {ordered && nonincreasing, detail};
}

Verdict a9() {
    const auto r = run_sweep(preset("fig6"), workers());
    const auto& first = r.aggregate.front();
    const auto& last = r.aggregate.back();
    const double pusch0 = first.metric("pusch_starvation").mean;
    const double pdcch0 = first.metric("pdcch_starvation").mean;
    const double pdcch1 = last.metric("pdcch_starvation").mean;
    return {pusch0 > pdcch0 && pdcch1 > pdcch0,
            fmt("N=%u pusch %.1f pdcch %.1f; N=%u pdcch %.1f", r.points.front().config.num_aggregators,
                pusch0, pdcch0, r.points.back().config.num_aggregators, pdcch1)};
}

Verdict a10() {
    auto packet = [](double arrival, std::optional<double> latency) {
        Packet p;
        p.size_bytes = 100;
        p.arrival_time_ms = arrival;
        if (latency)
            p.delivery_time_ms = arrival + *latency;
        else
            p.drop_reason = DropReason::ra_attempts_exhausted;
        return p;
    };
    const std::vector<Packet> two{packet(0, 100), packet(0, 300)};
    std::vector<Packet> ten;
    for (int i = 0; i < 9; ++i) ten.push_back(packet(i, 10 + i));
    ten.push_back(packet(9, std::nullopt));
    const std::vector<Packet> three{packet(0, 10), packet(0, 20), packet(0, 30)};
    const double tp = throughput_bps(two);
    const double out = outage(ten);
    const auto lat = latency_stats(three);
    return {tp == 4000.0 && out == 0.1 && lat.mean_ms == 20.0 && lat.median_ms == 20.0,
            fmt("throughput %.17g, outage %.17g, mean latency %.17g", tp, out, lat.mean_ms)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, Verdict (*)()>> criteria{
        {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},
        {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %s  %s  (%.1f s)\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !v.pass;
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
