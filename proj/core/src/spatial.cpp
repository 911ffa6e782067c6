#include "mtcagg/spatial.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "mtcagg/error.hpp"

namespace mtcagg {
namespace {

Point uniform_in_disk(double radius, Rng& rng) {
    const double r = radius * std::sqrt(rng.uniform01());
    const double theta = 2.0 * std::numbers::pi * rng.uniform01();
    return {r * std::cos(theta), r * std::sin(theta)};
}

double squared_distance(Point a, Point b) noexcept {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

}  // namespace

double distance(Point a, Point b) noexcept { return std::sqrt(squared_distance(a, b)); }

Topology deploy(const ScenarioConfig& config, Rng& rng) {
    Topology topo;
    // Aggregators first so that, for a fixed seed, their positions do not
    // depend on M.
    topo.aggregator_positions.reserve(config.num_aggregators);
    for (std::uint32_t i = 0; i < config.num_aggregators; ++i)
        topo.aggregator_positions.push_back(uniform_in_disk(config.cell_radius_m, rng));
    topo.mtd_positions.reserve(config.num_mtds);
    for (std::uint32_t i = 0; i < config.num_mtds; ++i)
        topo.mtd_positions.push_back(uniform_in_disk(config.cell_radius_m, rng));
    if (!topo.aggregator_positions.empty())
        topo.association = associate(topo.mtd_positions, topo.aggregator_positions);
    return topo;
}

Topology deploy(const ScenarioConfig& config, std::uint64_t seed) {
    Rng rng(seed);
    return deploy(config, rng);
}

std::vector<std::uint32_t> associate(std::span<const Point> mtds,
                                     std::span<const Point> aggregators) {
    if (aggregators.empty()) throw DomainError("associate: no aggregators deployed");
    std::vector<std::uint32_t> out(mtds.size());
    for (std::size_t m = 0; m < mtds.size(); ++m) {
        std::uint32_t best = 0;
        double best_d2 = squared_distance(mtds[m], aggregators[0]);
        for (std::size_t a = 1; a < aggregators.size(); ++a) {
            const double d2 = squared_distance(mtds[m], aggregators[a]);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = static_cast<std::uint32_t>(a);
            }
        }
        out[m] = best;
    }
    return out;
}

double active_aggregator_density(double lambda_a, double lambda_u) {
    if (!(lambda_a > 0.0)) throw DomainError("active_aggregator_density: lambda_a must be > 0");
    if (!(lambda_u >= 0.0)) throw DomainError("active_aggregator_density: lambda_u must be >= 0");
    constexpr double shape = 3.5;
    const double p_empty = std::pow(1.0 + lambda_u / (shape * lambda_a), -shape);
    return lambda_a * (1.0 - p_empty);
}

double empirical_active_fraction(const Topology& topology) {
    const auto n = topology.aggregator_positions.size();
    if (n == 0) throw DomainError("empirical_active_fraction: no aggregators deployed");
    std::vector<char> active(n, 0);
    for (auto a : topology.association) active[a] = 1;
    std::size_t count = 0;
    for (char c : active) count += static_cast<std::size_t>(c);
    return static_cast<double>(count) / static_cast<double>(n);
}

void write_topology_csv(std::ostream& out, const Topology& topology) {
    out << "node_id,role,x_m,y_m,aggregator\n";
    std::size_t id = 0;
    out << id++ << ",bs," << topology.bs_position.x << ',' << topology.bs_position.y << ",\n";
    for (const auto& p : topology.aggregator_positions)
        out << id++ << ",aggregator," << p.x << ',' << p.y << ",\n";
    for (std::size_t m = 0; m < topology.mtd_positions.size(); ++m) {
        const auto& p = topology.mtd_positions[m];
        out << id++ << ",mtd," << p.x << ',' << p.y << ',';
        if (!topology.association.empty()) out << topology.association[m];
        out << '\n';
    }
}

}  // namespace mtcagg
