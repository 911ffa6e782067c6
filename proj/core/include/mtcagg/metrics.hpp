#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtcagg/engine.hpp"
#include "mtcagg/traffic.hpp"

namespace mtcagg {

/// Delivered bits divided by the sum of the delivered packets' latencies
/// (seconds). Zero when nothing was delivered.
double throughput_bps(std::span<const Packet> packets);
double throughput_bps(const RunResult& result);

/// Mean over UEs with at least one delivery of the same ratio restricted
/// to that UE's packets. Zero when nothing was delivered.
double per_ue_throughput_bps(std::span<const Packet> packets);

/// Fraction of generated packets that were not delivered. Throws
/// DomainError when no packet was generated.
double outage(std::span<const Packet> packets);
double outage(const RunResult& result);

struct LatencyStats {
    std::size_t count = 0;
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
};

/// Linear interpolation between order statistics (rank q*(n-1)).
/// `sorted` must be nonempty and ascending.
double percentile_sorted(std::span<const double> sorted, double q);

/// Over delivered packets only. Throws DomainError when none was delivered.
LatencyStats latency_stats(std::span<const Packet> packets);
LatencyStats latency_stats(const RunResult& result);

/// The per-run performance indexes.
struct MetricSummary {
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t buffered_at_end = 0;
    double throughput_bps = 0.0;
    double per_aggregator_throughput_bps = 0.0;
    /// Absent when nothing was delivered.
    std::optional<LatencyStats> latency;
    /// Absent when nothing was generated.
    std::optional<double> outage_fraction;
    Incidents incidents;
};

MetricSummary summarize(const RunResult& result);

/// Named numeric view of a summary, in the fixed CSV column order. Missing
/// values are NaN.
std::vector<std::pair<std::string, double>> metric_columns(const MetricSummary& summary);

/// Mean and two-sided 95% Student-t half-width of one metric across
/// repetitions. NaN samples are ignored; the half-width is NaN with fewer
/// than two finite samples.
struct MeanCi {
    double mean = 0.0;
    double half_width = 0.0;
    std::size_t samples = 0;
};

MeanCi mean_ci(std::span<const double> samples);

/// 97.5% quantile of Student's t with `dof` degrees of freedom.
double student_t_975(std::size_t dof);

struct OptimalPoint {
    std::uint32_t num_aggregators = 0;
    double throughput_bps = 0.0;
};

/// Argmax of throughput over the swept N values; ties go to the smallest N.
/// Throws DomainError on an empty map.
OptimalPoint find_optimal_n(const std::map<std::uint32_t, double>& mean_throughput);
OptimalPoint find_optimal_n(const std::map<std::uint32_t, MetricSummary>& summaries);

}  // namespace mtcagg
