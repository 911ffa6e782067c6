#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "mtcagg/rng.hpp"
#include "mtcagg/scenario.hpp"
#include "mtcagg/spatial.hpp"

namespace mtcagg {

enum class DropReason : std::uint8_t {
    ra_attempts_exhausted,
    data_retransmissions_exhausted,
    not_delivered_by_sim_end,
};

std::string_view to_string(DropReason reason) noexcept;

struct Packet {
    std::uint32_t id = 0;
    std::uint32_t source_mtd = 0;
    /// Cellular node carrying the packet: the associated aggregator, or
    /// the MTD itself in the direct-access case.
    std::uint32_t ue = 0;
    /// Generation instant; equals arrival at the aggregator.
    double arrival_time_ms = 0.0;
    std::uint32_t size_bytes = 0;
    std::optional<double> delivery_time_ms;
    std::optional<DropReason> drop_reason;

    bool delivered() const noexcept { return delivery_time_ms.has_value(); }
    double latency_ms() const { return *delivery_time_ms - arrival_time_ms; }

    bool operator==(const Packet&) const = default;
};

/// Packets in global arrival order; `packets[i].id == i`.
struct ArrivalPlan {
    std::vector<Packet> packets;
    /// Packet ids per UE, in arrival order.
    std::vector<std::vector<std::uint32_t>> per_ue;
};

/// Independent Poisson streams at `packet_rate_per_s` per MTD on
/// [0, sim_length_s). Ties in arrival time are ordered by MTD index.
ArrivalPlan generate_arrivals(const ScenarioConfig& config, const Topology& topology, Rng& rng);

/// First subframe boundary at or after `time_ms`.
std::int64_t quantize_to_subframe(double time_ms) noexcept;

/// CSV: packet_id,mtd,aggregator,t_arrival_ms (aggregator empty for direct access).
void write_arrivals_csv(std::ostream& out, const ArrivalPlan& plan, bool direct_access);

}  // namespace mtcagg
