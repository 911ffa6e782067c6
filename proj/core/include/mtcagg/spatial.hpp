#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mtcagg/rng.hpp"
#include "mtcagg/scenario.hpp"

namespace mtcagg {

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

double distance(Point a, Point b) noexcept;

/// Node placement in a cell centred on the base station.
struct Topology {
    std::vector<Point> mtd_positions;
    std::vector<Point> aggregator_positions;
    /// MTD index -> aggregator index. Empty when there are no aggregators.
    std::vector<std::uint32_t> association;
    Point bs_position{};

    bool operator==(const Topology&) const = default;
};

/// Places exactly N aggregators and then M MTDs uniformly on the disk and
/// associates every MTD with its nearest aggregator. Draws from `rng`.
Topology deploy(const ScenarioConfig& config, Rng& rng);
Topology deploy(const ScenarioConfig& config, std::uint64_t seed);

/// Nearest aggregator for every MTD; ties go to the lowest index.
/// Throws DomainError when `aggregators` is empty.
std::vector<std::uint32_t> associate(std::span<const Point> mtds,
                                     std::span<const Point> aggregators);

/// Expected density of aggregators serving at least one MTD, for
/// independent PPPs of aggregators (lambda_a) and MTDs (lambda_u):
///   lambda_a * (1 - (1 + lambda_u / (3.5 lambda_a))^-3.5)
double active_aggregator_density(double lambda_a, double lambda_u);

/// Fraction of aggregators with at least one associated MTD.
double empirical_active_fraction(const Topology& topology);

/// CSV: node_id,role,x_m,y_m,aggregator (aggregator empty for
/// aggregators, the BS, and MTDs in the direct-access case).
void write_topology_csv(std::ostream& out, const Topology& topology);

}  // namespace mtcagg
