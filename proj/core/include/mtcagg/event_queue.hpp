#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "mtcagg/error.hpp"

namespace mtcagg {

enum class EventKind : std::uint8_t {
    arrival,     ///< payload: packet id
    rao,         ///< random access opportunity with registered contenders
    ra_failure,  ///< node learns its random-access attempt failed
    feedback,    ///< node learns the HARQ outcome of its transport block
    timer,       ///< RRC inactivity deadline; payload: deadline subframe
};

struct Event {
    std::int64_t time_subframe = 0;
    std::uint64_t sequence_number = 0;
    EventKind kind = EventKind::arrival;
    std::uint32_t ue = 0;
    std::uint64_t payload = 0;
};

/// Min-queue on (time, sequence number). Sequence numbers follow insertion
/// order, so same-time events leave in the order they were scheduled.
class EventQueue {
public:
    void schedule(std::int64_t time_subframe, EventKind kind, std::uint32_t ue,
                  std::uint64_t payload = 0) {
        MTCAGG_CHECK(time_subframe >= now_, "event scheduled in the past: " << time_subframe
                                                                            << " < " << now_);
        heap_.push(Event{time_subframe, next_sequence_++, kind, ue, payload});
    }

    bool empty() const noexcept { return heap_.empty(); }
    std::size_t size() const noexcept { return heap_.size(); }
    const Event& peek() const { return heap_.top(); }

    Event next_event() {
        MTCAGG_CHECK(!heap_.empty(), "next_event on an empty queue");
        Event e = heap_.top();
        heap_.pop();
        now_ = e.time_subframe;
        return e;
    }

    /// Moves virtual time forward without consuming an event.
    void advance_to(std::int64_t time_subframe) {
        MTCAGG_CHECK(time_subframe >= now_, "virtual time moving backwards");
        MTCAGG_CHECK(heap_.empty() || heap_.top().time_subframe >= time_subframe,
                     "advancing past a pending event");
        now_ = time_subframe;
    }

    std::int64_t now() const noexcept { return now_; }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const noexcept {
            if (a.time_subframe != b.time_subframe) return a.time_subframe > b.time_subframe;
            return a.sequence_number > b.sequence_number;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_sequence_ = 0;
    std::int64_t now_ = 0;
};

}  // namespace mtcagg
