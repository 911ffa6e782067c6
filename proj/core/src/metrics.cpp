#include "mtcagg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "mtcagg/error.hpp"

namespace mtcagg {
namespace {
constexpr double nan = std::numeric_limits<double>::quiet_NaN();
}

double throughput_bps(std::span<const Packet> packets) {
    double bits = 0.0;
    double latency_s = 0.0;
    for (const auto& p : packets) {
        if (!p.delivered()) continue;
        bits += 8.0 * p.size_bytes;
        latency_s += p.latency_ms() / 1000.0;
    }
    return bits > 0.0 ? bits / latency_s : 0.0;
}

double throughput_bps(const RunResult& result) { return throughput_bps(result.packets); }

double per_ue_throughput_bps(std::span<const Packet> packets) {
    std::map<std::uint32_t, std::pair<double, double>> per_ue;  // bits, seconds
    for (const auto& p : packets) {
        if (!p.delivered()) continue;
        auto& acc = per_ue[p.ue];
        acc.first += 8.0 * p.size_bytes;
        acc.second += p.latency_ms() / 1000.0;
    }
    if (per_ue.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [ue, acc] : per_ue) sum += acc.first / acc.second;
    return sum / static_cast<double>(per_ue.size());
}

double outage(std::span<const Packet> packets) {
    if (packets.empty()) throw DomainError("outage: no packet was generated");
    const auto lost = std::count_if(packets.begin(), packets.end(),
                                    [](const Packet& p) { return !p.delivered(); });
    return static_cast<double>(lost) / static_cast<double>(packets.size());
}

double outage(const RunResult& result) { return outage(result.packets); }

double percentile_sorted(std::span<const double> sorted, double q) {
    MTCAGG_CHECK(!sorted.empty(), "percentile of an empty sample");
    const double rank = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

LatencyStats latency_stats(std::span<const Packet> packets) {
    std::vector<double> lat;
    for (const auto& p : packets)
        if (p.delivered()) lat.push_back(p.latency_ms());
    if (lat.empty()) throw DomainError("latency_stats: no packet was delivered");
    std::sort(lat.begin(), lat.end());
    LatencyStats s;
    s.count = lat.size();
    s.mean_ms = std::accumulate(lat.begin(), lat.end(), 0.0) / static_cast<double>(lat.size());
    s.median_ms = percentile_sorted(lat, 0.5);
    s.p95_ms = percentile_sorted(lat, 0.95);
    return s;
}

LatencyStats latency_stats(const RunResult& result) { return latency_stats(result.packets); }

MetricSummary summarize(const RunResult& result) {
    MetricSummary s;
    s.generated = result.generated();
    s.delivered = result.delivered();
    s.dropped = result.dropped();
    s.buffered_at_end = result.buffered_at_end();
    s.throughput_bps = throughput_bps(result.packets);
    s.per_aggregator_throughput_bps = per_ue_throughput_bps(result.packets);
    if (s.delivered > 0) s.latency = latency_stats(result.packets);
    if (s.generated > 0) s.outage_fraction = outage(result.packets);
    s.incidents = result.incidents;
    return s;
}

std::vector<std::pair<std::string, double>> metric_columns(const MetricSummary& s) {
    const auto& i = s.incidents;
    auto d = [](std::uint64_t v) { return static_cast<double>(v); };
    return {
        {"generated", d(s.generated)},
        {"delivered", d(s.delivered)},
        {"dropped", d(s.dropped)},
        {"buffered_at_end", d(s.buffered_at_end)},
        {"throughput_bps", s.throughput_bps},
        {"per_aggregator_throughput_bps", s.per_aggregator_throughput_bps},
        {"mean_latency_ms", s.latency ? s.latency->mean_ms : nan},
        {"median_latency_ms", s.latency ? s.latency->median_ms : nan},
        {"p95_latency_ms", s.latency ? s.latency->p95_ms : nan},
        {"outage", s.outage_fraction.value_or(nan)},
        {"tx_error", d(i.tx_error)},
        {"pdcch_starvation", d(i.pdcch_starvation)},
        {"pusch_starvation", d(i.pusch_starvation)},
        {"pdsch_starvation", d(i.pdsch_starvation)},
        {"expirations", d(i.expirations)},
        {"preambles_sent", d(i.preambles_sent)},
        {"preamble_collisions", d(i.preamble_collisions)},
        {"ra_failures", d(i.ra_failures)},
        {"connections", d(i.connections)},
        {"transport_blocks", d(i.transport_blocks)},
    };
}

double student_t_975(std::size_t dof) {
    if (dof == 0) throw DomainError("student_t_975: zero degrees of freedom");
    boost::math::students_t dist(static_cast<double>(dof));
    return boost::math::quantile(dist, 0.975);
}

MeanCi mean_ci(std::span<const double> samples) {
    std::vector<double> finite;
    for (double v : samples)
        if (std::isfinite(v)) finite.push_back(v);
    MeanCi out;
    out.samples = finite.size();
    if (finite.empty()) {
        out.mean = nan;
        out.half_width = nan;
        return out;
    }
    const double n = static_cast<double>(finite.size());
    out.mean = std::accumulate(finite.begin(), finite.end(), 0.0) / n;
    if (finite.size() < 2) {
        out.half_width = nan;
        return out;
    }
    double ss = 0.0;
    for (double v : finite) ss += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    out.half_width = student_t_975(finite.size() - 1) * sd / std::sqrt(n);
    return out;
}

OptimalPoint find_optimal_n(const std::map<std::uint32_t, double>& mean_throughput) {
    if (mean_throughput.empty()) throw DomainError("find_optimal_n: empty sweep");
    OptimalPoint best{mean_throughput.begin()->first, mean_throughput.begin()->second};
    for (const auto& [n, tp] : mean_throughput) {
        if (tp > best.throughput_bps) best = {n, tp};  // strict: ties keep the smaller N
    }
    return best;
}

OptimalPoint find_optimal_n(const std::map<std::uint32_t, MetricSummary>& summaries) {
    std::map<std::uint32_t, double> tp;
    for (const auto& [n, s] : summaries) tp[n] = s.throughput_bps;
    return find_optimal_n(tp);
}

}  // namespace mtcagg
