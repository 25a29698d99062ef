#include "edgecasc/simulation.hpp"

#include <algorithm>

#include "edgecasc/error.hpp"

namespace edgecasc {

Simulation::Simulation(const ScenarioConfig& config, const ScenarioCalibration& calibration) : config_(config) {
    config_.validate();
    window_ms_ = config_.slo.window_s * 1000.0;
    series_ms_ = config_.metrics.series_interval_s.value_or(config_.slo.window_s) * 1000.0;

    const auto& catalog = config_.server.catalog;
    std::size_t deployed = 0;
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (catalog[i].model_id() == config_.server.deployed) deployed = i;
    }

    const auto expanded = expand_devices(config_);
    traces_.reserve(expanded.size());
    for (std::size_t g = 0; g < expanded.size(); ++g) {
        traces_.push_back(device_trace(config_, expanded[g].template_index, g));
    }

    std::vector<OfflineSchedule> offline(expanded.size());
    if (config_.intermittent) {
        for (std::size_t g = 0; g < expanded.size(); ++g) {
            offline[g] = intermittent_schedule_for(*config_.intermittent, g, expanded[g].profile.n_samples,
                                                   config_.seed);
        }
    }

    ServerOptions sopts;
    sopts.downlink_ms = config_.network.downlink_ms;
    sopts.swap_delay_ms = config_.server.swap_delay_ms;
    sopts.cooldown_ms = config_.server.cooldown_s.value_or(10.0 * config_.slo.window_s) * 1000.0;
    sopts.history = config_.server.history;
    server_ = std::make_unique<Server>(catalog, deployed, sopts);

    scheduler_ = std::make_unique<Scheduler>(config_.policy, config_.slo.window_s, config_.network.downlink_ms,
                                             calibration.switch_limits);

    std::vector<MetricsCollector::DeviceInfo> infos;
    devices_.reserve(expanded.size());
    for (std::size_t g = 0; g < expanded.size(); ++g) {
        const auto& ex = expanded[g];
        const double calibrated = calibration.static_threshold.at(ex.template_index).at(deployed);
        static_thresholds_.try_emplace(ex.profile.tier.label, calibrated);
        const double initial = config_.policy.initial.calibrated ? calibrated : config_.policy.initial.value;

        DeviceOptions dopts;
        dopts.window_s = config_.slo.window_s;
        dopts.network = config_.network;
        dopts.noise_pct = config_.noise_pct;
        dopts.noise_seed = child_seed(config_.seed, "noise", g);
        const auto index = static_cast<std::uint32_t>(g);
        devices_.emplace_back(index, ex.profile, std::span<const TraceRecord>(traces_[g].records), initial,
                              offline[g], dopts);
        scheduler_->register_device(index, ex.profile.tier, ex.profile.sr_target, initial);
        infos.push_back({ex.profile.device_id, ex.profile.tier, ex.profile.n_samples});
    }
    metrics_ = std::make_unique<MetricsCollector>(std::move(infos), config_.metrics.running_window_s);
    finished_.assign(devices_.size(), false);
}

void Simulation::schedule_periodic(EventKind kind, double interval_ms) {
    SimEvent ev;
    ev.time_ms = engine_.now() + interval_ms;
    ev.kind = kind;
    ev.actor = kSchedulerActor;
    engine_.schedule(ev);
}

void Simulation::record_outcome(std::uint32_t device, const SampleOutcome& outcome) {
    metrics_->record_outcome(device, outcome, engine_.now());
    if (observer_) observer_(device, outcome, engine_.now());
    if (!finished_[device] && devices_[device].finished()) {
        finished_[device] = true;
        if (--remaining_ == 0 && !ended_) {
            ended_ = true;
            SimEvent end;
            end.time_ms = engine_.now();
            end.kind = EventKind::RunEnd;
            end.actor = kSchedulerActor;
            engine_.schedule(end);
        }
    }
}

void Simulation::record_server_point() {
    metrics_->record_server(
        {engine_.now(), server_->queue_len(), server_->last_batch_size(), server_->deployed_model().model_id()});
}

void Simulation::sample_series() {
    SeriesPoint p;
    p.time_ms = engine_.now();
    p.active_devices = scheduler_->active_count();
    if (auto mean = scheduler_->mean_active_threshold()) last_mean_threshold_ = *mean;
    p.mean_threshold = last_mean_threshold_;
    p.running_sr = metrics_->running_sr(engine_.now());
    p.running_accuracy = metrics_->running_accuracy(engine_.now());
    p.queue_len = server_->queue_len();
    p.deployed_model = server_->deployed_model().model_id();
    p.batch_size = server_->last_batch_size();
    metrics_->record_series(std::move(p));
}

void Simulation::dispatch(const SimEvent& ev) {
    switch (ev.kind) {
        case EventKind::InferenceComplete: {
            auto& dev = devices_.at(ev.actor);
            if (auto outcome = dev.on_inference_complete(engine_)) record_outcome(ev.actor, *outcome);
            break;
        }
        case EventKind::RequestArrival: {
            const auto& rec = traces_.at(ev.source).records.at(ev.sample);
            server_->on_request(engine_, Request{ev.source, ev.sample, engine_.now(), &rec});
            record_server_point();
            break;
        }
        case EventKind::BatchComplete:
            server_->on_batch_complete(engine_);
            record_server_point();
            break;
        case EventKind::SwapComplete:
            server_->on_swap_complete(engine_);
            record_server_point();
            break;
        case EventKind::ResultDelivery: {
            auto& dev = devices_.at(ev.actor);
            record_outcome(ev.actor, dev.on_result(engine_, ev.sample, ev.flag));
            break;
        }
        case EventKind::WindowTick: {
            auto& dev = devices_.at(ev.actor);
            if (auto sr = dev.on_window_tick(engine_)) {
                SimEvent up;
                up.time_ms = engine_.now() + config_.network.uplink_ms;
                up.kind = EventKind::SrUpdateArrival;
                up.actor = kSchedulerActor;
                up.source = ev.actor;
                up.value = *sr;
                engine_.schedule(up);
            }
            break;
        }
        case EventKind::SrUpdateArrival: {
            if (auto delivery = scheduler_->handle_sr_update(ev.source, ev.value, engine_.now())) {
                SimEvent d;
                d.time_ms = delivery->deliver_at_ms;
                d.kind = EventKind::ThresholdDelivery;
                d.actor = delivery->device;
                d.value = delivery->threshold;
                engine_.schedule(d);
            }
            break;
        }
        case EventKind::ThresholdDelivery:
            devices_.at(ev.actor).apply_threshold(ev.value);
            break;
        case EventKind::SwitchCheck: {
            scheduler_->mark_inactive(engine_.now());
            if (config_.policy.kind == PolicyKind::MultiTascStep) {
                const std::uint32_t target = config_.policy.optimal_batch > 0
                                                 ? config_.policy.optimal_batch
                                                 : std::max<std::uint32_t>(1, server_->deployed_model().max_batch() / 2);
                for (const auto& d : scheduler_->step_update(server_->recent_batches(), target, engine_.now())) {
                    SimEvent td;
                    td.time_ms = d.deliver_at_ms;
                    td.kind = EventKind::ThresholdDelivery;
                    td.actor = d.device;
                    td.value = d.threshold;
                    engine_.schedule(td);
                }
            }
            if (const int decision = scheduler_->check_switch(); decision != 0) {
                if (auto target = switch_target(server_->catalog(), server_->deployed(), decision)) {
                    server_->request_swap(engine_, *target);
                    record_server_point();
                }
            }
            if (!ended_) schedule_periodic(EventKind::SwitchCheck, window_ms_);
            break;
        }
        case EventKind::SeriesSample:
            sample_series();
            if (!ended_) schedule_periodic(EventKind::SeriesSample, series_ms_);
            break;
        case EventKind::DeviceOffline:
            devices_.at(ev.actor).on_offline(engine_);
            break;
        case EventKind::DeviceOnline:
            devices_.at(ev.actor).on_online(engine_);
            break;
        case EventKind::RunEnd:
            sample_series();
            break;
    }
}

RunReport Simulation::run(std::ostream* event_log, std::optional<double> until_ms) {
    engine_.set_event_log(event_log);
    remaining_ = 0;
    for (std::size_t i = 0; i < devices_.size(); ++i) {
        if (devices_[i].n_samples() == 0) {
            finished_[i] = true;
        } else {
            ++remaining_;
        }
    }
    for (auto& dev : devices_) dev.start(engine_);
    if (remaining_ == 0) {
        ended_ = true;
        SimEvent end;
        end.kind = EventKind::RunEnd;
        end.actor = kSchedulerActor;
        engine_.schedule(end);
    } else {
        schedule_periodic(EventKind::SwitchCheck, window_ms_);
        schedule_periodic(EventKind::SeriesSample, series_ms_);
    }

    engine_.run([this](const SimEvent& ev) { dispatch(ev); }, until_ms);
    engine_.set_event_log(nullptr);

    std::map<std::uint32_t, std::vector<std::uint64_t>> outstanding;
    for (const auto& dev : devices_) {
        if (dev.outstanding() > 0) outstanding[dev.index()] = dev.outstanding_ids();
    }
    RunReport report = metrics_->finalize(outstanding);
    report.scenario = config_.name;
    report.config_digest = config_digest(config_);
    report.policy = to_string(config_.policy.kind);
    report.seed = config_.seed;
    report.static_thresholds = static_thresholds_;
    report.switches = server_->switches();
    report.updates = scheduler_->updates();
    report.events_dispatched = engine_.dispatched();
    return report;
}

}  // namespace edgecasc
