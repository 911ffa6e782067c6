#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mtcagg/event_queue.hpp"
#include "mtcagg/protocol.hpp"
#include "mtcagg/rng.hpp"
#include "mtcagg/scenario.hpp"
#include "mtcagg/traffic.hpp"

namespace mtcagg {

/// Counters of protocol incidents over one run.
struct Incidents {
    /// Failed receptions of any message (data or control).
    std::uint64_t tx_error = 0;
    /// Deferrals for lack of a CCE.
    std::uint64_t pdcch_starvation = 0;
    /// Deferrals for lack of uplink RBs.
    std::uint64_t pusch_starvation = 0;
    /// Deferrals for lack of downlink RBs.
    std::uint64_t pdsch_starvation = 0;
    /// Messages that missed their deadline.
    std::uint64_t expirations = 0;
    std::uint64_t preambles_sent = 0;
    /// UEs whose preamble was shared with another UE.
    std::uint64_t preamble_collisions = 0;
    std::uint64_t ra_failures = 0;
    std::uint64_t ra_procedure_failures = 0;
    std::uint64_t connections = 0;
    std::uint64_t releases = 0;
    std::uint64_t transport_blocks = 0;
    std::uint64_t data_retransmissions = 0;

    bool operator==(const Incidents&) const = default;
};

enum class TraceOutcome : std::uint8_t {
    sent,
    error,
    collided,
    expired,
    delivered,
    dropped,
    connected,
    released,
};

std::string_view to_string(TraceOutcome outcome) noexcept;

struct TraceRecord {
    std::int64_t subframe = 0;
    std::uint32_t ue = 0;
    MessageKind kind = MessageKind::data;
    TraceOutcome outcome = TraceOutcome::sent;
    ResourceUse resources;
};

/// CSV: subframe,ue,message,outcome,cces,dl_rbs,ul_rbs
void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace);

/// The base station and every node contending for it. Owns the protocol
/// state (node contexts, resource calendar, scheduler queue) of one run;
/// time is driven from outside through `handle()` and `run_scheduler()`.
///
/// Within a subframe the engine first delivers all events, then calls
/// `run_scheduler()` once. The scheduler serves ready requests first-come
/// first-served by (ready subframe, node id).
class Cell {
public:
    Cell(const ScenarioConfig& config, std::vector<UeContext> ues, std::span<Packet> packets,
         EventQueue& queue, Rng& rng, std::vector<TraceRecord>* trace = nullptr);

    void handle(const Event& event);
    void on_packet_arrival(std::uint32_t ue, std::uint32_t packet_id, std::int64_t now);
    void run_scheduler(std::int64_t now);

    /// Earliest subframe at which the scheduler has work, if any.
    std::optional<std::int64_t> next_scheduler_subframe(std::int64_t now) const;

    const Incidents& incidents() const noexcept { return incidents_; }
    const ResourceCalendar& calendar() const noexcept { return calendar_; }
    const std::vector<UeContext>& ues() const noexcept { return ues_; }
    std::size_t pending_requests() const noexcept { return pending_.size(); }

private:
    static constexpr std::uint32_t no_group = UINT32_MAX;

    struct RequestKey {
        std::int64_t ready = 0;
        std::uint32_t ue = 0;
        std::uint64_t sequence = 0;

        auto operator<=>(const RequestKey&) const = default;
    };

    struct Request {
        std::int64_t deadline = 0;
        MessageKind kind = MessageKind::data;
        /// Index into the setup steps; unused for data.
        std::uint32_t step = 0;
        /// RA group for msg2/msg3, which are shared by colliding nodes.
        std::uint32_t group = no_group;
        std::uint32_t harq_attempt = 0;
        ResourceUse cost;
        std::uint32_t ul_rbs_remaining = 0;
        std::uint32_t rbs_per_fragment = 0;
        bool started = false;
        bool deferral_reported = false;
    };

    void enqueue(std::uint32_t ue, std::int64_t ready, Request request);
    void join_next_rao(std::uint32_t ue, std::int64_t earliest);
    void on_rao(std::int64_t now);
    void ra_failure(std::uint32_t ue, std::int64_t now);
    void connect(std::uint32_t ue, std::int64_t now);
    void request_data(std::uint32_t ue, std::int64_t now);
    void on_feedback(std::uint32_t ue, std::int64_t now);
    void on_timer(std::uint32_t ue, std::uint64_t deadline, std::int64_t now);

    /// Attempts to serve `request` in subframe `now`. Returns true when the
    /// request is finished (served completely) and must leave the queue.
    bool try_serve(const RequestKey& key, Request& request, std::int64_t now);
    void expire(const RequestKey& key, Request& request, std::int64_t now);
    void complete_setup_step(std::uint32_t ue, const Request& request, std::int64_t now);
    void complete_data(std::uint32_t ue, Request request, std::int64_t now);
    void drop_packets(UeContext& ue, std::uint32_t count, DropReason reason);
    bool channel_error(double probability);
    void trace(std::int64_t subframe, std::uint32_t ue, MessageKind kind, TraceOutcome outcome,
               ResourceUse resources = {});

    const ScenarioConfig& config_;
    std::vector<UeContext> ues_;
    std::span<Packet> packets_;
    EventQueue& queue_;
    Rng& rng_;
    std::vector<TraceRecord>* trace_;

    ResourceCalendar calendar_;
    std::vector<SetupStep> steps_;
    std::map<RequestKey, Request> pending_;
    /// Connected nodes whose SR is sent at the end of the current subframe.
    std::vector<std::uint32_t> sr_due_;
    std::uint64_t next_request_sequence_ = 0;
    std::map<std::int64_t, std::vector<std::uint32_t>> rao_contenders_;
    std::vector<std::vector<std::uint32_t>> groups_;
    Incidents incidents_;
};

}  // namespace mtcagg
