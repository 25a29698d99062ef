#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <queue>
#include <vector>

namespace edgecasc {

enum class EventKind : std::uint8_t {
    InferenceComplete,
    RequestArrival,
    BatchComplete,
    SwapComplete,
    ResultDelivery,
    WindowTick,
    SrUpdateArrival,
    ThresholdDelivery,
    SwitchCheck,
    SeriesSample,
    DeviceOffline,
    DeviceOnline,
    RunEnd,
};

const char* to_string(EventKind kind);

inline constexpr std::uint32_t kServerActor = 0xFFFFFFFFu;
inline constexpr std::uint32_t kSchedulerActor = 0xFFFFFFFEu;

struct SimEvent {
    double time_ms = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::RunEnd;
    std::uint32_t actor = 0;
    /// Kind-specific payload: originating device, sample id, a rate or
    /// threshold, a correctness bit.
    std::uint32_t source = 0;
    std::uint64_t sample = 0;
    double value = 0.0;
    bool flag = false;
};

/// Virtual clock plus an event queue ordered by (time_ms, seq).
class Engine {
  public:
    using Handler = std::function<void(const SimEvent&)>;

    double now() const { return now_ms_; }

    /// Enqueues `event`; its seq is assigned here. Throws SimulationError for past times.
    std::uint64_t schedule(SimEvent event);

    /// Dispatches events until the queue drains, RunEnd is handled, or the next
    /// event would pass `until_ms`. Returns the final clock value.
    double run(const Handler& handler, std::optional<double> until_ms = std::nullopt);

    std::size_t pending() const { return queue_.size(); }
    std::uint64_t dispatched() const { return dispatched_; }
    std::uint64_t scheduled() const { return next_seq_; }

    /// One line per dispatch: time_ms,seq,kind,actor. Null disables logging.
    void set_event_log(std::ostream* log);

  private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const {
            if (a.time_ms != b.time_ms) return a.time_ms > b.time_ms;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
    double now_ms_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t dispatched_ = 0;
    std::ostream* log_ = nullptr;
};

}  // namespace edgecasc
