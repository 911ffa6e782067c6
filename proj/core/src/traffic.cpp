#include "mtcagg/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mtcagg {

std::string_view to_string(DropReason reason) noexcept {
    switch (reason) {
        case DropReason::ra_attempts_exhausted: return "ra_attempts_exhausted";
        case DropReason::data_retransmissions_exhausted: return "data_retransmissions_exhausted";
        case DropReason::not_delivered_by_sim_end: return "not_delivered_by_sim_end";
    }
    return "unknown";
}

ArrivalPlan generate_arrivals(const ScenarioConfig& config, const Topology& topology, Rng& rng) {
    ArrivalPlan plan;
    plan.per_ue.resize(config.num_ues());
    const bool direct = topology.aggregator_positions.empty();
    const double horizon_ms = config.sim_length_s * 1000.0;
    const double rate_per_ms = config.packet_rate_per_s / 1000.0;

    if (rate_per_ms > 0.0) {
        for (std::uint32_t mtd = 0; mtd < topology.mtd_positions.size(); ++mtd) {
            const std::uint32_t ue = direct ? mtd : topology.association[mtd];
            double t = rng.exponential(rate_per_ms);
            while (t < horizon_ms) {
                Packet p;
                p.source_mtd = mtd;
                p.ue = ue;
                p.arrival_time_ms = t;
                p.size_bytes = config.packet_size_bytes;
                plan.packets.push_back(p);
                t += rng.exponential(rate_per_ms);
            }
        }
    }
    // Per-MTD streams are already increasing, so a stable sort on time alone
    // leaves ties ordered by MTD index.
    std::stable_sort(plan.packets.begin(), plan.packets.end(),
                     [](const Packet& a, const Packet& b) { return a.arrival_time_ms < b.arrival_time_ms; });
    for (std::uint32_t i = 0; i < plan.packets.size(); ++i) {
        plan.packets[i].id = i;
        plan.per_ue[plan.packets[i].ue].push_back(i);
    }
    return plan;
}

std::int64_t quantize_to_subframe(double time_ms) noexcept {
    return static_cast<std::int64_t>(std::ceil(time_ms));
}

void write_arrivals_csv(std::ostream& out, const ArrivalPlan& plan, bool direct_access) {
    out << "packet_id,mtd,aggregator,t_arrival_ms\n";
    const auto old = out.precision(12);
    for (const auto& p : plan.packets) {
        out << p.id << ',' << p.source_mtd << ',';
        if (!direct_access) out << p.ue;
        out << ',' << p.arrival_time_ms << '\n';
    }
    out.precision(old);
}

}  // namespace mtcagg
