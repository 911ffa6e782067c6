#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mtcagg/cell.hpp"
#include "mtcagg/scenario.hpp"
#include "mtcagg/spatial.hpp"
#include "mtcagg/traffic.hpp"

namespace mtcagg {

struct UeStats {
    std::uint32_t ue_id = 0;
    double distance_to_bs_m = 0.0;
    std::uint32_t connections = 0;
    std::uint32_t ra_failures = 0;
    std::uint32_t transport_blocks = 0;

    bool operator==(const UeStats&) const = default;
};

struct RunResult {
    ScenarioConfig config;
    std::uint64_t seed = 0;
    /// Every generated packet, indexed by id.
    std::vector<Packet> packets;
    Incidents incidents;
    std::vector<UeStats> ues;
    /// Largest per-subframe occupancy observed.
    ResourceUse peak_usage;
    std::uint64_t events_processed = 0;

    std::size_t generated() const noexcept { return packets.size(); }
    std::size_t delivered() const noexcept;
    /// Dropped by the protocol (RA or HARQ exhaustion).
    std::size_t dropped() const noexcept;
    /// Still buffered (or not yet arrived) when the horizon was reached.
    std::size_t buffered_at_end() const noexcept;

    bool operator==(const RunResult&) const = default;
};

/// Optional diagnostic outputs of a run.
struct RunArtifacts {
    Topology topology;
    ArrivalPlan arrivals;
    std::vector<TraceRecord> trace;
};

/// Drives `cell` from subframe 0 until `horizon` (exclusive): in each
/// subframe with work, all due events are handled, then the scheduler runs
/// once. Returns the number of events handled.
std::uint64_t run_event_loop(Cell& cell, EventQueue& queue, std::int64_t horizon);

/// One simulation run: deploy, generate arrivals, then the event loop until
/// the horizon. Packets not delivered by then are marked
/// `not_delivered_by_sim_end`. Deterministic in (config, seed).
RunResult run(const ScenarioConfig& config, std::uint64_t seed);
RunResult run(const ScenarioConfig& config, std::uint64_t seed, RunArtifacts& artifacts);

/// JSON document of the complete result (stable key and element order).
std::string to_json(const RunResult& result);

/// CSV: packet_id,mtd,ue,arrival_ms,delivery_ms,latency_ms,drop_reason
void write_packets_csv(std::ostream& out, const RunResult& result);

}  // namespace mtcagg
