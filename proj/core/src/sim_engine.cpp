#include "edgecasc/sim_engine.hpp"

#include <ostream>
#include <sstream>

#include "edgecasc/error.hpp"

namespace edgecasc {

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::InferenceComplete: return "InferenceComplete";
        case EventKind::RequestArrival: return "RequestArrival";
        case EventKind::BatchComplete: return "BatchComplete";
        case EventKind::SwapComplete: return "SwapComplete";
        case EventKind::ResultDelivery: return "ResultDelivery";
        case EventKind::WindowTick: return "WindowTick";
        case EventKind::SrUpdateArrival: return "SrUpdateArrival";
        case EventKind::ThresholdDelivery: return "ThresholdDelivery";
        case EventKind::SwitchCheck: return "SwitchCheck";
        case EventKind::SeriesSample: return "SeriesSample";
        case EventKind::DeviceOffline: return "DeviceOffline";
        case EventKind::DeviceOnline: return "DeviceOnline";
        case EventKind::RunEnd: return "RunEnd";
    }
    return "?";
}

void Engine::set_event_log(std::ostream* log) {
    log_ = log;
    if (log_) log_->precision(17);
}

std::uint64_t Engine::schedule(SimEvent event) {
    if (event.time_ms < now_ms_) {
        std::ostringstream msg;
        msg << "event " << to_string(event.kind) << " scheduled at " << event.time_ms
            << " ms, before the clock (" << now_ms_ << " ms)";
        throw SimulationError(msg.str());
    }
    event.seq = next_seq_++;
    queue_.push(event);
    return event.seq;
}

double Engine::run(const Handler& handler, std::optional<double> until_ms) {
    while (!queue_.empty()) {
        if (until_ms && queue_.top().time_ms > *until_ms) {
            now_ms_ = *until_ms;
            break;
        }
        const SimEvent ev = queue_.top();
        queue_.pop();
        now_ms_ = ev.time_ms;
        ++dispatched_;
        if (log_) {
            *log_ << ev.time_ms << ',' << ev.seq << ',' << to_string(ev.kind) << ',';
            if (ev.actor == kServerActor) {
                *log_ << "server";
            } else if (ev.actor == kSchedulerActor) {
                *log_ << "scheduler";
            } else {
                *log_ << "device" << ev.actor;
            }
            *log_ << '\n';
        }
        handler(ev);
        if (ev.kind == EventKind::RunEnd) break;
    }
    return now_ms_;
}

}  // namespace edgecasc
