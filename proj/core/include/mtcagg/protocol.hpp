#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mtcagg/link.hpp"
#include "mtcagg/rng.hpp"
#include "mtcagg/scenario.hpp"

namespace mtcagg {

enum class RrcState : std::uint8_t { idle, random_access, connected };
enum class MessageKind : std::uint8_t { msg1, msg2, msg3, msg4, signalling, data };
enum class Direction : std::uint8_t { downlink, uplink };

std::string_view to_string(RrcState state) noexcept;
std::string_view to_string(MessageKind kind) noexcept;

struct RaState {
    std::optional<std::uint32_t> chosen_preamble;
    /// Preamble transmissions in the current procedure.
    std::uint32_t preamble_attempt_count = 0;
    /// Completed (failed) procedures for the packet at the buffer head.
    std::uint32_t ra_attempt_count_for_head_payload = 0;
    std::int64_t backoff_deadline_subframe = 0;
};

/// Transport block currently owned by a connected node.
struct Inflight {
    /// Leading buffer entries carried by this block.
    std::uint32_t packets = 0;
    std::uint32_t harq_retransmissions = 0;
    /// Sent; the HARQ outcome is not yet known to the node.
    bool awaiting_feedback = false;
};

struct UeContext {
    std::uint32_t ue_id = 0;
    RrcState rrc_state = RrcState::idle;
    /// Packet ids, oldest first.
    std::deque<std::uint32_t> buffer;
    RaState ra;
    std::optional<std::int64_t> connection_timer_deadline_subframe;
    std::optional<Inflight> inflight;
    /// Packets sized into the connection request (msg3) of the running procedure.
    std::uint32_t msg3_bundle = 0;
    /// The node owns an entry in the BS scheduler queue.
    bool request_pending = false;

    double distance_to_bs_m = 0.0;
    LinkProfile link;

    std::uint32_t connections = 0;
    std::uint32_t ra_failures = 0;
    std::uint32_t transport_blocks = 0;
};

// ---------------------------------------------------------------------------
// Resources

struct ResourceUse {
    std::uint32_t cces = 0;
    std::uint32_t dl_rbs = 0;
    std::uint32_t ul_rbs = 0;

    bool operator==(const ResourceUse&) const = default;
};

/// Per-subframe occupancy of PDCCH CCEs, downlink RBs and PUSCH RBs. RAO
/// subframes lose `prach.rbs_per_rao` uplink RBs to the PRACH. Allocations
/// are checked against capacity on every call.
class ResourceCalendar {
public:
    explicit ResourceCalendar(const ScenarioConfig& config);

    bool is_rao(std::int64_t subframe) const noexcept {
        return subframe % rao_period_ == 0;
    }
    /// First RAO at or after `subframe`.
    std::int64_t next_rao(std::int64_t subframe) const noexcept;

    ResourceUse capacity(std::int64_t subframe) const noexcept;
    ResourceUse used(std::int64_t subframe) const noexcept;
    ResourceUse available(std::int64_t subframe) const noexcept;

    /// Throws InvariantViolation if any capacity would be exceeded or the
    /// subframe has left the tracked window.
    void allocate(std::int64_t subframe, ResourceUse use);

    /// Element-wise maximum of `used()` over every subframe allocated so far.
    ResourceUse peak() const noexcept { return peak_; }

private:
    static constexpr std::size_t window = 256;

    struct Slot {
        std::int64_t subframe = -1;
        ResourceUse use;
    };

    std::int64_t rao_period_;
    std::uint32_t prach_rbs_;
    ResourceUse full_;
    std::array<Slot, window> slots_{};
    std::int64_t newest_ = -1;
    ResourceUse peak_;
};

// ---------------------------------------------------------------------------
// Bundling

struct Bundle {
    std::vector<std::uint32_t> packet_ids;
    std::uint32_t total_bytes = 0;
    std::uint32_t trigger_packet_id = 0;
};

/// The first min(B, buffer size) packets, sized at `packet_size_bytes` each.
/// The buffer must be nonempty.
Bundle bundle_at_sr(const std::deque<std::uint32_t>& buffer, std::uint32_t bundle_limit,
                    std::uint32_t packet_size_bytes);

// ---------------------------------------------------------------------------
// Random access

struct PreambleGroup {
    std::uint32_t preamble = 0;
    std::vector<std::uint32_t> ues;

    bool collided() const noexcept { return ues.size() > 1; }
};

struct PreambleChoice {
    std::uint32_t ue = 0;
    std::uint32_t preamble = 0;
};

/// Groups UEs by chosen preamble; output sorted by preamble, members keep
/// input order.
std::vector<PreambleGroup> group_by_preamble(std::span<const PreambleChoice> choices);

/// Every contender draws a preamble uniformly from `num_preambles`, in the
/// order given. A preamble chosen by more than one UE is a collision.
std::vector<PreambleGroup> run_rach_round(std::span<const std::uint32_t> contenders,
                                          std::uint32_t num_preambles, Rng& rng);

/// Closed-form mean number of singleton preambles among `contenders` UEs.
double expected_rach_successes(std::uint32_t contenders, std::uint32_t num_preambles);

// ---------------------------------------------------------------------------
// Connection setup

struct SetupStep {
    MessageKind kind = MessageKind::msg2;
    Direction direction = Direction::downlink;
    /// Resources charged in the subframe the message is sent.
    ResourceUse cost;
    /// Channel failures are retried up to HARQ L times (msg2 is not).
    bool harq = true;
};

/// msg2, msg3, msg4, then the post-msg4 signalling alternating uplink
/// and downlink (uplink first: setup complete, security, reconfiguration).
std::vector<SetupStep> connection_setup_steps(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// RRC timer

enum class TimerOutcome : std::uint8_t { not_due, released, rearmed };

/// Inactivity check for a connected node. At or past the deadline, a node
/// with nothing buffered, in flight or requested returns to Idle; otherwise
/// the timer is re-armed for another `idle_timeout_ms`.
TimerOutcome tick_rrc(UeContext& ue, std::int64_t now_subframe, std::uint32_t idle_timeout_ms);

}  // namespace mtcagg
