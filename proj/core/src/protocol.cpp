#include "mtcagg/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "mtcagg/error.hpp"

namespace mtcagg {

std::string_view to_string(RrcState state) noexcept {
    switch (state) {
        case RrcState::idle: return "idle";
        case RrcState::random_access: return "random_access";
        case RrcState::connected: return "connected";
    }
    return "unknown";
}

std::string_view to_string(MessageKind kind) noexcept {
    switch (kind) {
        case MessageKind::msg1: return "msg1";
        case MessageKind::msg2: return "msg2";
        case MessageKind::msg3: return "msg3";
        case MessageKind::msg4: return "msg4";
        case MessageKind::signalling: return "signalling";
        case MessageKind::data: return "data";
    }
    return "unknown";
}

ResourceCalendar::ResourceCalendar(const ScenarioConfig& config)
    : rao_period_(config.prach.rao_period_subframes),
      prach_rbs_(config.prach.rbs_per_rao),
      full_{config.phy.cces_per_subframe, config.phy.dl_rbs_per_subframe,
            config.phy.ul_rbs_per_subframe} {}

std::int64_t ResourceCalendar::next_rao(std::int64_t subframe) const noexcept {
    const std::int64_t rem = subframe % rao_period_;
    return rem == 0 ? subframe : subframe + (rao_period_ - rem);
}

ResourceUse ResourceCalendar::capacity(std::int64_t subframe) const noexcept {
    ResourceUse cap = full_;
    if (is_rao(subframe)) cap.ul_rbs -= prach_rbs_;
    return cap;
}

ResourceUse ResourceCalendar::used(std::int64_t subframe) const noexcept {
    const auto& slot = slots_[static_cast<std::size_t>(subframe) % window];
    return slot.subframe == subframe ? slot.use : ResourceUse{};
}

ResourceUse ResourceCalendar::available(std::int64_t subframe) const noexcept {
    const auto cap = capacity(subframe);
    const auto use = used(subframe);
    return {cap.cces - use.cces, cap.dl_rbs - use.dl_rbs, cap.ul_rbs - use.ul_rbs};
}

void ResourceCalendar::allocate(std::int64_t subframe, ResourceUse use) {
    MTCAGG_CHECK(subframe >= 0, "negative subframe " << subframe);
    MTCAGG_CHECK(subframe + static_cast<std::int64_t>(window) > newest_,
                 "subframe " << subframe << " is outside the calendar window");
    auto& slot = slots_[static_cast<std::size_t>(subframe) % window];
    if (slot.subframe != subframe) slot = Slot{subframe, {}};
    const auto cap = capacity(subframe);
    const ResourceUse next{slot.use.cces + use.cces, slot.use.dl_rbs + use.dl_rbs,
                           slot.use.ul_rbs + use.ul_rbs};
    MTCAGG_CHECK(next.cces <= cap.cces, "CCE overbooking in subframe " << subframe);
    MTCAGG_CHECK(next.dl_rbs <= cap.dl_rbs, "downlink RB overbooking in subframe " << subframe);
    MTCAGG_CHECK(next.ul_rbs <= cap.ul_rbs, "uplink RB overbooking in subframe " << subframe);
    slot.use = next;
    newest_ = std::max(newest_, subframe);
    peak_.cces = std::max(peak_.cces, next.cces);
    peak_.dl_rbs = std::max(peak_.dl_rbs, next.dl_rbs);
    peak_.ul_rbs = std::max(peak_.ul_rbs, next.ul_rbs);
}

Bundle bundle_at_sr(const std::deque<std::uint32_t>& buffer, std::uint32_t bundle_limit,
                    std::uint32_t packet_size_bytes) {
    MTCAGG_CHECK(!buffer.empty(), "bundling from an empty buffer");
    MTCAGG_CHECK(bundle_limit >= 1, "bundle limit must be >= 1");
    const auto count = std::min<std::size_t>(bundle_limit, buffer.size());
    Bundle b;
    b.packet_ids.assign(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(count));
    b.total_bytes = static_cast<std::uint32_t>(count) * packet_size_bytes;
    b.trigger_packet_id = buffer.front();
    return b;
}

std::vector<PreambleGroup> group_by_preamble(std::span<const PreambleChoice> choices) {
    std::vector<PreambleGroup> groups;
    for (const auto& c : choices) {
        auto it = std::lower_bound(groups.begin(), groups.end(), c.preamble,
                                   [](const PreambleGroup& g, std::uint32_t p) { return g.preamble < p; });
        if (it == groups.end() || it->preamble != c.preamble)
            it = groups.insert(it, PreambleGroup{c.preamble, {}});
        it->ues.push_back(c.ue);
    }
    return groups;
}

std::vector<PreambleGroup> run_rach_round(std::span<const std::uint32_t> contenders,
                                          std::uint32_t num_preambles, Rng& rng) {
    std::vector<PreambleChoice> choices;
    choices.reserve(contenders.size());
    for (auto ue : contenders)
        choices.push_back({ue, static_cast<std::uint32_t>(rng.uniform_int(0, num_preambles - 1))});
    return group_by_preamble(choices);
}

double expected_rach_successes(std::uint32_t contenders, std::uint32_t num_preambles) {
    if (contenders == 0) return 0.0;
    const double stay = 1.0 - 1.0 / static_cast<double>(num_preambles);
    return contenders * std::pow(stay, static_cast<double>(contenders) - 1.0);
}

std::vector<SetupStep> connection_setup_steps(const ScenarioConfig& config) {
    constexpr ResourceUse dl_message{1, 1, 0};
    constexpr ResourceUse ul_message{1, 0, 1};
    std::vector<SetupStep> steps;
    steps.push_back({MessageKind::msg2, Direction::downlink, dl_message, false});
    // msg3 rides on the grant carried by msg2: no PDCCH cost.
    steps.push_back({MessageKind::msg3, Direction::uplink, {0, 0, 1}, true});
    steps.push_back({MessageKind::msg4, Direction::downlink, dl_message, true});
    const bool charge = config.rrc.charge_signalling_resources;
    for (std::uint32_t i = 0; i < config.rrc.post_msg4_signalling_msgs; ++i) {
        const bool uplink = i % 2 == 0;
        SetupStep s;
        s.kind = MessageKind::signalling;
        s.direction = uplink ? Direction::uplink : Direction::downlink;
        s.cost = charge ? (uplink ? ul_message : dl_message) : ResourceUse{};
        s.harq = true;
        steps.push_back(s);
    }
    return steps;
}

TimerOutcome tick_rrc(UeContext& ue, std::int64_t now_subframe, std::uint32_t idle_timeout_ms) {
    MTCAGG_CHECK(ue.rrc_state == RrcState::connected, "RRC timer on a node that is not connected");
    MTCAGG_CHECK(ue.connection_timer_deadline_subframe.has_value(), "connected without a timer");
    if (now_subframe < *ue.connection_timer_deadline_subframe) return TimerOutcome::not_due;
    const bool busy = !ue.buffer.empty() || ue.inflight.has_value() || ue.request_pending;
    if (busy) {
        ue.connection_timer_deadline_subframe = now_subframe + idle_timeout_ms;
        return TimerOutcome::rearmed;
    }
    ue.rrc_state = RrcState::idle;
    ue.connection_timer_deadline_subframe.reset();
    ue.ra = RaState{};
    return TimerOutcome::released;
}

}  // namespace mtcagg
