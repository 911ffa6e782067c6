#include "mtcagg/cell.hpp"

#include <algorithm>
#include <ostream>

#include "mtcagg/error.hpp"

namespace mtcagg {

std::string_view to_string(TraceOutcome outcome) noexcept {
    switch (outcome) {
        case TraceOutcome::sent: return "sent";
        case TraceOutcome::error: return "error";
        case TraceOutcome::collided: return "collided";
        case TraceOutcome::expired: return "expired";
        case TraceOutcome::delivered: return "delivered";
        case TraceOutcome::dropped: return "dropped";
        case TraceOutcome::connected: return "connected";
        case TraceOutcome::released: return "released";
    }
    return "unknown";
}

void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace) {
    out << "subframe,ue,message,outcome,cces,dl_rbs,ul_rbs\n";
    for (const auto& r : trace) {
        out << r.subframe << ',' << r.ue << ',' << to_string(r.kind) << ',' << to_string(r.outcome)
            << ',' << r.resources.cces << ',' << r.resources.dl_rbs << ',' << r.resources.ul_rbs
            << '\n';
    }
}

Cell::Cell(const ScenarioConfig& config, std::vector<UeContext> ues, std::span<Packet> packets,
           EventQueue& queue, Rng& rng, std::vector<TraceRecord>* trace)
    : config_(config),
      ues_(std::move(ues)),
      packets_(packets),
      queue_(queue),
      rng_(rng),
      trace_(trace),
      calendar_(config),
      steps_(connection_setup_steps(config)) {}

void Cell::handle(const Event& event) {
    const auto now = event.time_subframe;
    switch (event.kind) {
        case EventKind::arrival:
            on_packet_arrival(event.ue, static_cast<std::uint32_t>(event.payload), now);
            break;
        case EventKind::rao: on_rao(now); break;
        case EventKind::ra_failure: ra_failure(event.ue, now); break;
        case EventKind::feedback: on_feedback(event.ue, now); break;
        case EventKind::timer: on_timer(event.ue, event.payload, now); break;
    }
}

void Cell::on_packet_arrival(std::uint32_t ue, std::uint32_t packet_id, std::int64_t now) {
    auto& u = ues_.at(ue);
    u.buffer.push_back(packet_id);
    switch (u.rrc_state) {
        case RrcState::idle:
            u.rrc_state = RrcState::random_access;
            join_next_rao(ue, std::max(now + 1, u.ra.backoff_deadline_subframe));
            break;
        case RrcState::random_access:
            break;  // sized into msg3 if it arrives in time
        case RrcState::connected:
            // The SR goes out after every arrival of this subframe is buffered.
            if (!u.inflight && std::find(sr_due_.begin(), sr_due_.end(), ue) == sr_due_.end())
                sr_due_.push_back(ue);
            break;
    }
}

std::optional<std::int64_t> Cell::next_scheduler_subframe(std::int64_t now) const {
    if (pending_.empty()) return std::nullopt;
    return std::max(now + 1, pending_.begin()->first.ready);
}

void Cell::enqueue(std::uint32_t ue, std::int64_t ready, Request request) {
    if (request.group != no_group) {
        for (auto m : groups_[request.group]) ues_[m].request_pending = true;
    } else {
        ues_[ue].request_pending = true;
    }
    pending_.emplace(RequestKey{ready, ue, next_request_sequence_++}, request);
}

void Cell::join_next_rao(std::uint32_t ue, std::int64_t earliest) {
    const auto rao = calendar_.next_rao(earliest);
    auto& contenders = rao_contenders_[rao];
    if (contenders.empty()) queue_.schedule(rao, EventKind::rao, 0);
    contenders.push_back(ue);
}

void Cell::on_rao(std::int64_t now) {
    auto node = rao_contenders_.extract(now);
    MTCAGG_CHECK(!node.empty(), "RAO event without contenders at " << now);
    auto& contenders = node.mapped();
    std::sort(contenders.begin(), contenders.end());

    const auto groups = run_rach_round(contenders, config_.prach.num_preambles, rng_);
    incidents_.preambles_sent += contenders.size();
    const std::int64_t ready = now + 1 + config_.timing.processing_time_ms;
    for (const auto& g : groups) {
        for (auto ue : g.ues) {
            ues_[ue].ra.chosen_preamble = g.preamble;
            trace(now, ue, MessageKind::msg1, g.collided() ? TraceOutcome::collided : TraceOutcome::sent);
        }
        if (g.collided()) incidents_.preamble_collisions += g.ues.size();

        const auto gid = static_cast<std::uint32_t>(groups_.size());
        groups_.push_back(g.ues);
        Request r;
        r.kind = MessageKind::msg2;
        r.step = 0;
        r.group = gid;
        r.cost = steps_[0].cost;
        r.deadline = ready + config_.prach.message_deadline_subframes;
        enqueue(g.ues.front(), ready, r);
    }
}

void Cell::ra_failure(std::uint32_t ue, std::int64_t now) {
    auto& u = ues_[ue];
    MTCAGG_CHECK(u.rrc_state == RrcState::random_access,
                 "RA failure for node " << ue << " in state " << to_string(u.rrc_state));
    ++incidents_.ra_failures;
    ++u.ra_failures;
    u.msg3_bundle = 0;
    u.ra.chosen_preamble.reset();

    if (++u.ra.preamble_attempt_count >= config_.prach.preamble_trans_max) {
        u.ra.preamble_attempt_count = 0;
        ++incidents_.ra_procedure_failures;
        if (++u.ra.ra_attempt_count_for_head_payload >= config_.prach.max_ra_attempts_per_payload) {
            drop_packets(u, 1, DropReason::ra_attempts_exhausted);
            trace(now, ue, MessageKind::msg1, TraceOutcome::dropped);
            u.ra.ra_attempt_count_for_head_payload = 0;
        }
    }
    if (u.buffer.empty()) {
        u.rrc_state = RrcState::idle;
        return;
    }
    const auto window = config_.prach.backoff_subframes;
    const auto backoff = window > 0 ? static_cast<std::int64_t>(rng_.uniform_int(0, window)) : 0;
    u.ra.backoff_deadline_subframe = now + backoff;
    join_next_rao(ue, std::max(now + 1, u.ra.backoff_deadline_subframe));
}

void Cell::connect(std::uint32_t ue, std::int64_t now) {
    auto& u = ues_[ue];
    MTCAGG_CHECK(u.msg3_bundle >= 1 && u.msg3_bundle <= u.buffer.size(),
                 "connection without a sized bundle for node " << ue);
    u.rrc_state = RrcState::connected;
    u.ra = RaState{};
    ++u.connections;
    ++incidents_.connections;
    const std::int64_t deadline = now + config_.rrc.idle_timeout_ms;
    u.connection_timer_deadline_subframe = deadline;
    queue_.schedule(deadline, EventKind::timer, ue, static_cast<std::uint64_t>(deadline));
    trace(now, ue, MessageKind::signalling, TraceOutcome::connected);

    u.inflight = Inflight{u.msg3_bundle, 0, false};
    u.msg3_bundle = 0;
    request_data(ue, now);
}

void Cell::request_data(std::uint32_t ue, std::int64_t now) {
    auto& u = ues_[ue];
    if (!u.inflight) {
        const auto bundle = bundle_at_sr(u.buffer, config_.bundle_limit, config_.packet_size_bytes);
        u.inflight = Inflight{static_cast<std::uint32_t>(bundle.packet_ids.size()), 0, false};
    }
    const auto rbs = required_rbs(u.inflight->packets * config_.packet_size_bytes,
                                  config_.phy.tbs_bits_per_rb);
    Request r;
    r.kind = MessageKind::data;
    r.cost = ResourceUse{1, 0, 0};
    r.ul_rbs_remaining = rbs;
    r.rbs_per_fragment = std::min(rbs, config_.timing.fragmentation_threshold_rbs);
    const std::int64_t ready = now + 1;
    r.deadline = ready + config_.harq.data_deadline_subframes;
    enqueue(ue, ready, r);
}

void Cell::on_feedback(std::uint32_t ue, std::int64_t now) {
    auto& u = ues_[ue];
    MTCAGG_CHECK(u.inflight && u.inflight->awaiting_feedback, "unexpected HARQ feedback for node " << ue);
    u.inflight.reset();
    if (!u.buffer.empty()) request_data(ue, now);
}

void Cell::on_timer(std::uint32_t ue, std::uint64_t deadline, std::int64_t now) {
    auto& u = ues_[ue];
    if (u.rrc_state != RrcState::connected ||
        u.connection_timer_deadline_subframe != static_cast<std::int64_t>(deadline))
        return;  // renewed or already released
    switch (tick_rrc(u, now, config_.rrc.idle_timeout_ms)) {
        case TimerOutcome::released:
            MTCAGG_CHECK(!u.request_pending && !u.inflight, "released node " << ue << " holds resources");
            ++incidents_.releases;
            trace(now, ue, MessageKind::signalling, TraceOutcome::released);
            break;
        case TimerOutcome::rearmed: {
            const auto next = *u.connection_timer_deadline_subframe;
            queue_.schedule(next, EventKind::timer, ue, static_cast<std::uint64_t>(next));
            break;
        }
        case TimerOutcome::not_due: break;
    }
}

void Cell::run_scheduler(std::int64_t now) {
    for (auto ue : sr_due_)
        if (!ues_[ue].inflight && ues_[ue].rrc_state == RrcState::connected) request_data(ue, now);
    sr_due_.clear();
    auto it = pending_.begin();
    while (it != pending_.end() && it->first.ready <= now) {
        const RequestKey key = it->first;
        Request& req = it->second;
        auto next = std::next(it);

        if (!req.started && now > req.deadline) {
            Request done = req;
            pending_.erase(it);
            expire(key, done, now);
        } else if (try_serve(key, req, now)) {
            Request done = req;
            pending_.erase(it);
            if (done.group != no_group) {
                for (auto m : groups_[done.group]) ues_[m].request_pending = false;
            } else {
                ues_[key.ue].request_pending = false;
            }
            if (done.kind == MessageKind::data)
                complete_data(key.ue, done, now);
            else
                complete_setup_step(key.ue, done, now);
        }
        it = next;
    }
}

bool Cell::try_serve(const RequestKey& key, Request& req, std::int64_t now) {
    const auto avail = calendar_.available(now);
    ResourceUse take = req.cost;
    if (req.kind == MessageKind::data)
        take.ul_rbs = std::min({avail.ul_rbs, req.ul_rbs_remaining,
                                config_.timing.fragmentation_threshold_rbs});

    const bool cce_short = take.cces > avail.cces;
    const bool dl_short = take.dl_rbs > avail.dl_rbs;
    const bool ul_short = req.kind == MessageKind::data ? take.ul_rbs == 0 : take.ul_rbs > avail.ul_rbs;
    if (cce_short || dl_short || ul_short) {
        if (!req.deferral_reported) {
            req.deferral_reported = true;
            if (cce_short)
                ++incidents_.pdcch_starvation;
            else if (dl_short)
                ++incidents_.pdsch_starvation;
            else
                ++incidents_.pusch_starvation;
        }
        return false;
    }

    calendar_.allocate(now, take);
    req.started = true;
    req.deferral_reported = false;
    if (req.kind == MessageKind::data) {
        trace(now, key.ue, MessageKind::data, TraceOutcome::sent, take);
        req.ul_rbs_remaining -= take.ul_rbs;
        return req.ul_rbs_remaining == 0;
    }
    return true;
}

void Cell::complete_setup_step(std::uint32_t ue, const Request& req, std::int64_t now) {
    const auto& step = steps_[req.step];
    const std::int64_t next_ready = now + 1 + config_.timing.processing_time_ms;
    const std::int64_t next_deadline = next_ready + config_.prach.message_deadline_subframes;

    if (step.kind == MessageKind::msg2) {
        std::vector<std::uint32_t> received;
        for (auto m : groups_[req.group]) {
            if (channel_error(ues_[m].link.downlink_error())) {
                ++incidents_.tx_error;
                trace(now, m, MessageKind::msg2, TraceOutcome::error, step.cost);
                queue_.schedule(next_ready, EventKind::ra_failure, m);
            } else {
                trace(now, m, MessageKind::msg2, TraceOutcome::sent, step.cost);
                received.push_back(m);
            }
        }
        if (received.empty()) return;
        groups_[req.group] = std::move(received);
        Request r;
        r.kind = MessageKind::msg3;
        r.step = 1;
        r.group = req.group;
        r.cost = steps_[1].cost;
        r.deadline = next_deadline;
        enqueue(groups_[req.group].front(), next_ready, r);
        return;
    }

    if (step.kind == MessageKind::msg3) {
        const auto& members = groups_[req.group];
        for (auto m : members) {
            auto& u = ues_[m];
            u.msg3_bundle = static_cast<std::uint32_t>(
                std::min<std::size_t>(config_.bundle_limit, u.buffer.size()));
        }
        if (members.size() > 1) {
            // Same grant, garbled msg3, no msg4: each node waits out contention resolution.
            const auto resolution = next_ready + config_.prach.message_deadline_subframes;
            for (auto m : members) {
                trace(now, m, MessageKind::msg3, TraceOutcome::collided, step.cost);
                queue_.schedule(resolution, EventKind::ra_failure, m);
            }
            return;
        }
        ue = members.front();
    }

    auto& u = ues_[ue];
    const double p = step.direction == Direction::downlink
                         ? u.link.downlink_error()
                         : u.link.uplink_error(std::max<std::uint32_t>(1, step.cost.ul_rbs));
    if (channel_error(p)) {
        ++incidents_.tx_error;
        trace(now, ue, step.kind, TraceOutcome::error, step.cost);
        if (step.harq && req.harq_attempt < config_.harq.max_data_retransmissions) {
            Request r = req;
            r.harq_attempt += 1;
            r.started = false;
            r.deferral_reported = false;
            r.deadline = next_deadline;
            enqueue(ue, next_ready, r);
        } else {
            queue_.schedule(next_ready, EventKind::ra_failure, ue);
        }
        return;
    }

    trace(now, ue, step.kind, TraceOutcome::sent, step.cost);
    if (req.step + 1 == steps_.size()) {
        connect(ue, now);
        return;
    }
    Request r;
    r.kind = steps_[req.step + 1].kind;
    r.step = req.step + 1;
    r.cost = steps_[req.step + 1].cost;
    r.deadline = next_deadline;
    enqueue(ue, next_ready, r);
}

void Cell::complete_data(std::uint32_t ue, Request req, std::int64_t now) {
    auto& u = ues_[ue];
    MTCAGG_CHECK(u.rrc_state == RrcState::connected && u.inflight, "data without a connection");
    ++incidents_.transport_blocks;
    const std::int64_t feedback_at = now + 1 + config_.timing.processing_time_ms;

    if (channel_error(u.link.uplink_error(req.rbs_per_fragment))) {
        ++incidents_.tx_error;
        trace(now, ue, MessageKind::data, TraceOutcome::error);
        if (u.inflight->harq_retransmissions < config_.harq.max_data_retransmissions) {
            ++u.inflight->harq_retransmissions;
            ++incidents_.data_retransmissions;
            request_data(ue, feedback_at - 1);
            return;
        }
        drop_packets(u, u.inflight->packets, DropReason::data_retransmissions_exhausted);
        trace(now, ue, MessageKind::data, TraceOutcome::dropped);
    } else {
        const double delivered_at = static_cast<double>(now + 1);
        for (std::uint32_t i = 0; i < u.inflight->packets; ++i) {
            auto& p = packets_[u.buffer.front()];
            MTCAGG_CHECK(!p.delivery_time_ms && !p.drop_reason, "packet " << p.id << " sent twice");
            p.delivery_time_ms = delivered_at;
            u.buffer.pop_front();
        }
        ++u.transport_blocks;
        trace(now, ue, MessageKind::data, TraceOutcome::delivered);
        const std::int64_t deadline = now + 1 + config_.rrc.idle_timeout_ms;
        u.connection_timer_deadline_subframe = deadline;
        queue_.schedule(deadline, EventKind::timer, ue, static_cast<std::uint64_t>(deadline));
    }
    u.inflight->packets = 0;
    u.inflight->awaiting_feedback = true;
    queue_.schedule(feedback_at, EventKind::feedback, ue);
}

void Cell::expire(const RequestKey& key, Request& req, std::int64_t now) {
    ++incidents_.expirations;
    if (req.kind == MessageKind::data) {
        auto& u = ues_[key.ue];
        u.request_pending = false;
        trace(now, key.ue, MessageKind::data, TraceOutcome::expired);
        if (u.inflight->harq_retransmissions < config_.harq.max_data_retransmissions) {
            ++u.inflight->harq_retransmissions;
            request_data(key.ue, now);
            return;
        }
        drop_packets(u, u.inflight->packets, DropReason::data_retransmissions_exhausted);
        trace(now, key.ue, MessageKind::data, TraceOutcome::dropped);
        u.inflight->packets = 0;
        u.inflight->awaiting_feedback = true;
        queue_.schedule(now + 1, EventKind::feedback, key.ue);
        return;
    }

    std::vector<std::uint32_t> members =
        req.group != no_group ? groups_[req.group] : std::vector<std::uint32_t>{key.ue};
    for (auto m : members) {
        ues_[m].request_pending = false;
        trace(now, m, req.kind, TraceOutcome::expired);
        ra_failure(m, now);
    }
}

void Cell::drop_packets(UeContext& ue, std::uint32_t count, DropReason reason) {
    MTCAGG_CHECK(count <= ue.buffer.size(), "dropping more packets than buffered");
    for (std::uint32_t i = 0; i < count; ++i) {
        packets_[ue.buffer.front()].drop_reason = reason;
        ue.buffer.pop_front();
    }
}

bool Cell::channel_error(double probability) {
    if (!config_.phy.channel_errors) return false;
    return rng_.bernoulli(probability);
}

void Cell::trace(std::int64_t subframe, std::uint32_t ue, MessageKind kind, TraceOutcome outcome,
                 ResourceUse resources) {
    if (trace_) trace_->push_back(TraceRecord{subframe, ue, kind, outcome, resources});
}

}  // namespace mtcagg
