#include "mtcagg/engine.hpp"

#include <algorithm>
#include <ostream>

#include "json.hpp"
#include "mtcagg/error.hpp"
#include "mtcagg/event_queue.hpp"

namespace mtcagg {

std::size_t RunResult::delivered() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(packets.begin(), packets.end(), [](const Packet& p) { return p.delivered(); }));
}

std::size_t RunResult::dropped() const noexcept {
    return static_cast<std::size_t>(std::count_if(packets.begin(), packets.end(), [](const Packet& p) {
        return p.drop_reason && *p.drop_reason != DropReason::not_delivered_by_sim_end;
    }));
}

std::size_t RunResult::buffered_at_end() const noexcept {
    return static_cast<std::size_t>(std::count_if(packets.begin(), packets.end(), [](const Packet& p) {
        return p.drop_reason == DropReason::not_delivered_by_sim_end;
    }));
}

std::uint64_t run_event_loop(Cell& cell, EventQueue& queue, std::int64_t horizon) {
    std::int64_t now = -1;
    std::uint64_t events = 0;
    while (true) {
        std::int64_t next = horizon;
        if (!queue.empty()) next = std::min(next, queue.peek().time_subframe);
        if (auto s = cell.next_scheduler_subframe(now)) next = std::min(next, *s);
        if (next >= horizon) break;
        MTCAGG_CHECK(next > now, "virtual time did not advance");
        now = next;
        queue.advance_to(now);
        while (!queue.empty() && queue.peek().time_subframe == now) {
            cell.handle(queue.next_event());
            ++events;
        }
        cell.run_scheduler(now);
    }
    return events;
}

namespace {

RunResult run_impl(const ScenarioConfig& config, std::uint64_t seed, RunArtifacts* artifacts) {
    config.validate();
    Rng rng(seed);
    Topology topo = deploy(config, rng);
    ArrivalPlan plan = generate_arrivals(config, topo, rng);

    const bool direct = config.num_aggregators == 0;
    std::vector<UeContext> ues(config.num_ues());
    for (std::uint32_t i = 0; i < ues.size(); ++i) {
        const Point pos = direct ? topo.mtd_positions[i] : topo.aggregator_positions[i];
        ues[i].ue_id = i;
        ues[i].distance_to_bs_m = distance(pos, topo.bs_position);
        ues[i].link = LinkProfile(config, ues[i].distance_to_bs_m);
    }

    const std::int64_t horizon = config.horizon_subframes();
    EventQueue queue;
    for (const auto& p : plan.packets) {
        const auto t = quantize_to_subframe(p.arrival_time_ms);
        if (t < horizon) queue.schedule(t, EventKind::arrival, p.ue, p.id);
    }

    RunResult result;
    result.packets = plan.packets;
    std::vector<TraceRecord>* trace = artifacts ? &artifacts->trace : nullptr;
    Cell cell(config, std::move(ues), result.packets, queue, rng, trace);

    const std::uint64_t events = run_event_loop(cell, queue, horizon);

    // Conservation: whatever was neither delivered nor dropped is still in
    // a node buffer or arrived too late to be processed.
    std::size_t in_buffers = 0;
    for (const auto& u : cell.ues()) in_buffers += u.buffer.size();
    std::size_t unprocessed = 0;
    for (const auto& p : result.packets)
        if (quantize_to_subframe(p.arrival_time_ms) >= horizon) ++unprocessed;
    std::size_t open = 0;
    for (auto& p : result.packets) {
        MTCAGG_CHECK(!(p.delivery_time_ms && p.drop_reason), "packet " << p.id << " both delivered and dropped");
        if (p.delivery_time_ms) {
            MTCAGG_CHECK(*p.delivery_time_ms >= p.arrival_time_ms, "delivery before arrival");
        } else if (!p.drop_reason) {
            p.drop_reason = DropReason::not_delivered_by_sim_end;
            ++open;
        }
    }
    MTCAGG_CHECK(open == in_buffers + unprocessed,
                 "packet conservation: " << open << " open vs " << in_buffers << " buffered + "
                                         << unprocessed << " unprocessed");

    result.config = config;
    result.seed = seed;
    result.incidents = cell.incidents();
    result.peak_usage = cell.calendar().peak();
    result.events_processed = events;
    for (const auto& u : cell.ues())
        result.ues.push_back(UeStats{u.ue_id, u.distance_to_bs_m, u.connections, u.ra_failures,
                                     u.transport_blocks});

    if (artifacts) {
        artifacts->topology = std::move(topo);
        artifacts->arrivals = std::move(plan);
    }
    return result;
}

}  // namespace

RunResult run(const ScenarioConfig& config, std::uint64_t seed) { return run_impl(config, seed, nullptr); }

RunResult run(const ScenarioConfig& config, std::uint64_t seed, RunArtifacts& artifacts) {
    return run_impl(config, seed, &artifacts);
}

std::string to_json(const RunResult& result) {
    using nlohmann::json;
    json doc;
    doc["config"] = json::parse(serialize_config(result.config));
    doc["seed"] = result.seed;
    const auto& inc = result.incidents;
    doc["incidents"] = {
        {"tx_error", inc.tx_error},
        {"pdcch_starvation", inc.pdcch_starvation},
        {"pusch_starvation", inc.pusch_starvation},
        {"pdsch_starvation", inc.pdsch_starvation},
        {"expirations", inc.expirations},
        {"preambles_sent", inc.preambles_sent},
        {"preamble_collisions", inc.preamble_collisions},
        {"ra_failures", inc.ra_failures},
        {"ra_procedure_failures", inc.ra_procedure_failures},
        {"connections", inc.connections},
        {"releases", inc.releases},
        {"transport_blocks", inc.transport_blocks},
        {"data_retransmissions", inc.data_retransmissions},
    };
    doc["peak_usage"] = {{"cces", result.peak_usage.cces},
                         {"dl_rbs", result.peak_usage.dl_rbs},
                         {"ul_rbs", result.peak_usage.ul_rbs}};
    doc["events_processed"] = result.events_processed;
    doc["totals"] = {{"generated", result.generated()},
                     {"delivered", result.delivered()},
                     {"dropped", result.dropped()},
                     {"buffered_at_end", result.buffered_at_end()}};

    json ues = json::array();
    for (const auto& u : result.ues)
        ues.push_back({{"ue", u.ue_id},
                       {"distance_m", u.distance_to_bs_m},
                       {"connections", u.connections},
                       {"ra_failures", u.ra_failures},
                       {"transport_blocks", u.transport_blocks}});
    doc["ues"] = std::move(ues);

    json packets = json::array();
    for (const auto& p : result.packets) {
        json rec = {{"id", p.id}, {"mtd", p.source_mtd}, {"ue", p.ue}, {"arrival_ms", p.arrival_time_ms}};
        rec["delivery_ms"] = p.delivery_time_ms ? json(*p.delivery_time_ms) : json(nullptr);
        rec["drop_reason"] = p.drop_reason ? json(std::string(to_string(*p.drop_reason))) : json(nullptr);
        packets.push_back(std::move(rec));
    }
    doc["packets"] = std::move(packets);
    return doc.dump();
}

void write_packets_csv(std::ostream& out, const RunResult& result) {
    out << "packet_id,mtd,ue,arrival_ms,delivery_ms,latency_ms,drop_reason\n";
    const auto old = out.precision(12);
    for (const auto& p : result.packets) {
        out << p.id << ',' << p.source_mtd << ',' << p.ue << ',' << p.arrival_time_ms << ',';
        if (p.delivery_time_ms) out << *p.delivery_time_ms << ',' << p.latency_ms();
        else out << ',';
        out << ',';
        if (p.drop_reason) out << to_string(*p.drop_reason);
        out << '\n';
    }
    out.precision(old);
}

}  // namespace mtcagg
