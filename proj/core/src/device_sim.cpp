#include "edgecasc/device_sim.hpp"

#include <algorithm>
#include <string>

#include "edgecasc/error.hpp"

namespace edgecasc {

Decision decide(double bvsb, double threshold) {
    return bvsb >= threshold ? Decision::Keep : Decision::Forward;
}

Device::Device(std::uint32_t index, DeviceProfile profile, std::span<const TraceRecord> trace,
               double initial_threshold, OfflineSchedule offline, DeviceOptions options)
    : index_(index),
      profile_(std::move(profile)),
      trace_(trace),
      n_samples_(profile_.n_samples),
      threshold_(std::clamp(initial_threshold, 0.0, 1.0)),
      offline_(std::move(offline)),
      options_(options),
      noise_rng_(options.noise_seed) {
    profile_.validate();
    if (trace_.size() < n_samples_) {
        throw ValidationError("device '" + profile_.device_id + "': trace has " + std::to_string(trace_.size()) +
                              " records, needs " + std::to_string(n_samples_));
    }
    if (!(options_.window_s > 0.0)) throw ValidationError("window_s must be > 0");
    std::stable_sort(offline_.begin(), offline_.end(),
                     [](const OfflinePeriod& a, const OfflinePeriod& b) { return a.at_index < b.at_index; });
    for (const auto& p : offline_) {
        if (p.at_index > n_samples_) {
            throw ValidationError("device '" + profile_.device_id + "': offline index beyond n_samples");
        }
        if (!(p.duration_ms > 0.0)) {
            throw ValidationError("device '" + profile_.device_id + "': offline duration must be > 0");
        }
    }
}

double Device::sample_latency() {
    if (options_.noise_pct <= 0.0) return profile_.t_inf_ms;
    std::uniform_real_distribution<double> jitter(-options_.noise_pct, options_.noise_pct);
    return profile_.t_inf_ms * (1.0 + jitter(noise_rng_) / 100.0);
}

void Device::schedule_next_inference(Engine& engine) {
    current_start_ms_ = engine.now();
    current_latency_ms_ = sample_latency();
    inferring_ = true;
    SimEvent ev;
    ev.time_ms = engine.now() + current_latency_ms_;
    ev.kind = EventKind::InferenceComplete;
    ev.actor = index_;
    ev.sample = cursor_;
    engine.schedule(ev);
}

bool Device::maybe_go_offline(Engine& engine) {
    if (done_generating()) return false;
    if (next_offline_ < offline_.size() && offline_[next_offline_].at_index == cursor_) {
        SimEvent ev;
        ev.time_ms = engine.now();
        ev.kind = EventKind::DeviceOffline;
        ev.actor = index_;
        engine.schedule(ev);
        return true;
    }
    return false;
}

void Device::start(Engine& engine) {
    if (n_samples_ > 0 && !maybe_go_offline(engine)) schedule_next_inference(engine);
    if (n_samples_ > 0) {
        ticking_ = true;
        SimEvent tick;
        tick.time_ms = engine.now() + options_.window_s * 1000.0;
        tick.kind = EventKind::WindowTick;
        tick.actor = index_;
        engine.schedule(tick);
    }
}

void Device::count(const SampleOutcome& outcome) {
    ++window_total_;
    if (outcome.slo_met) ++window_hits_;
    if (outcome.origin == Origin::Local) {
        ++counters_.local;
    } else {
        ++counters_.server;
    }
    if (outcome.correct) ++counters_.correct;
    if (outcome.slo_met) ++counters_.slo_met;
}

std::optional<SampleOutcome> Device::on_inference_complete(Engine& engine) {
    if (!inferring_ || done_generating()) {
        throw SimulationError("device '" + profile_.device_id + "': unexpected inference completion");
    }
    inferring_ = false;
    const TraceRecord& rec = trace_[cursor_];
    const std::uint64_t sample_id = cursor_;
    ++cursor_;

    std::optional<SampleOutcome> result;
    if (decide(rec.bvsb, threshold_) == Decision::Keep) {
        SampleOutcome out;
        out.sample_id = sample_id;
        out.origin = Origin::Local;
        out.latency_ms = current_latency_ms_;
        out.slo_met = out.latency_ms <= profile_.slo_ms;
        out.correct = rec.light_correct;
        count(out);
        result = out;
    } else {
        outstanding_.emplace(sample_id, current_start_ms_);
        SimEvent req;
        req.time_ms = engine.now() + options_.network.uplink_ms;
        req.kind = EventKind::RequestArrival;
        req.actor = kServerActor;
        req.source = index_;
        req.sample = sample_id;
        engine.schedule(req);
    }

    if (online_ && !done_generating() && !maybe_go_offline(engine)) schedule_next_inference(engine);
    return result;
}

std::optional<double> Device::on_window_tick(Engine& engine) {
    std::optional<double> sr;
    if (online_ || finished()) {
        if (window_total_ > 0) {
            sr = 100.0 * static_cast<double>(window_hits_) / static_cast<double>(window_total_);
            ++counters_.windows_reported;
            counters_.windowed_samples += window_total_;
        }
        window_hits_ = 0;
        window_total_ = 0;
    }
    if (finished()) {
        ticking_ = false;
    } else {
        SimEvent tick;
        tick.time_ms = engine.now() + options_.window_s * 1000.0;
        tick.kind = EventKind::WindowTick;
        tick.actor = index_;
        engine.schedule(tick);
    }
    return sr;
}

SampleOutcome Device::on_result(Engine& engine, std::uint64_t sample_id, bool heavy_correct) {
    auto it = outstanding_.find(sample_id);
    if (it == outstanding_.end()) {
        throw SimulationError("device '" + profile_.device_id + "': result for unknown sample " +
                              std::to_string(sample_id));
    }
    SampleOutcome out;
    out.sample_id = sample_id;
    out.origin = Origin::Server;
    out.latency_ms = engine.now() - it->second;
    out.slo_met = out.latency_ms <= profile_.slo_ms;
    out.correct = heavy_correct;
    outstanding_.erase(it);
    count(out);
    return out;
}

void Device::on_offline(Engine& engine) {
    const OfflinePeriod& period = offline_.at(next_offline_++);
    online_ = false;
    SimEvent ev;
    ev.time_ms = engine.now() + period.duration_ms;
    ev.kind = EventKind::DeviceOnline;
    ev.actor = index_;
    engine.schedule(ev);
}

void Device::on_online(Engine& engine) {
    online_ = true;
    if (!done_generating() && !inferring_ && !maybe_go_offline(engine)) schedule_next_inference(engine);
}

void Device::apply_threshold(double threshold) { threshold_ = std::clamp(threshold, 0.0, 1.0); }

std::vector<std::uint64_t> Device::outstanding_ids() const {
    std::vector<std::uint64_t> ids;
    ids.reserve(outstanding_.size());
    for (const auto& [id, start] : outstanding_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace edgecasc
