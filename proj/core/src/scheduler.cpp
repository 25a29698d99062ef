#include "edgecasc/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "edgecasc/error.hpp"

namespace edgecasc {

const char* to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Static: return "static";
        case PolicyKind::MultiTascStep: return "multitasc";
        case PolicyKind::MultiTascPP: return "multitascpp";
    }
    return "?";
}

PolicyKind parse_policy_kind(const std::string& name) {
    if (name == "static") return PolicyKind::Static;
    if (name == "multitasc") return PolicyKind::MultiTascStep;
    if (name == "multitascpp") return PolicyKind::MultiTascPP;
    throw ValidationError("unknown policy '" + name + "' (expected static|multitasc|multitascpp)");
}

void PolicyConfig::validate() const {
    if (!(a > 0.0)) throw ValidationError("policy scaling factor a must be > 0");
    if (kind == PolicyKind::MultiTascStep && !(step > 0.0)) {
        throw ValidationError("policy step must be > 0 for the batch-size baseline");
    }
    if (!initial.calibrated && !(initial.value >= 0.0 && initial.value <= 1.0)) {
        throw ValidationError("fixed initial threshold must lie in [0,1]");
    }
}

double continuous_update(double sr_target, double sr_update, double a, double threshold) {
    return threshold - a * (sr_target - sr_update);
}

std::optional<MultiplierStep> apply_multiplier(double sr_target, double sr_update, double thresh_updated,
                                               double multiplier, std::size_t active_devices) {
    if (active_devices == 0) return std::nullopt;
    MultiplierStep out;
    if (sr_target < sr_update) {
        out.threshold = multiplier * thresh_updated;
        out.multiplier = multiplier * (1.0 + 0.1 / static_cast<double>(active_devices));
    } else {
        out.threshold = thresh_updated;
        out.multiplier = 1.0;
    }
    out.threshold = std::clamp(out.threshold, 0.0, 1.0);
    return out;
}

int switch_decision(std::span<const ThresholdState> states, const SwitchLimits& limits) {
    // Per tier: are all active devices below c_lower / above c_upper?
    struct TierFlags {
        bool all_below = true;
        bool all_above = true;
    };
    std::map<TierId, TierFlags> tiers;
    for (const auto& s : states) {
        if (!s.active) continue;
        auto upper = limits.c_upper.find(s.tier);
        if (upper == limits.c_upper.end()) {
            throw ValidationError("no c_upper limit for tier '" + s.tier.label + "'");
        }
        auto& f = tiers[s.tier];
        f.all_below = f.all_below && s.threshold < limits.c_lower;
        f.all_above = f.all_above && s.threshold > upper->second;
    }
    if (tiers.empty()) return 0;
    bool every_above = true;
    for (const auto& [tier, f] : tiers) {
        if (f.all_below) return -1;
        every_above = every_above && f.all_above;
    }
    return every_above ? 1 : 0;
}

std::optional<std::size_t> switch_target(std::span<const ServerModelProfile> catalog, std::size_t deployed,
                                         int decision) {
    if (deployed >= catalog.size()) throw ValidationError("deployed model not in catalog");
    const auto& current = catalog[deployed];
    std::optional<std::size_t> best;
    if (decision < 0) {
        // Slowest model that is still faster than the deployed one.
        const double cur = current.batch_latency_ms(1);
        for (std::size_t i = 0; i < catalog.size(); ++i) {
            const double lat = catalog[i].batch_latency_ms(1);
            if (lat < cur && (!best || lat > catalog[*best].batch_latency_ms(1))) best = i;
        }
    } else if (decision > 0) {
        // Least accurate model that is still more accurate than the deployed one.
        for (std::size_t i = 0; i < catalog.size(); ++i) {
            const double acc = catalog[i].accuracy();
            if (acc > current.accuracy() && (!best || acc < catalog[*best].accuracy())) best = i;
        }
    }
    return best;
}

double multitasc_step_delta(const std::deque<std::uint32_t>& recent_batches, std::uint32_t optimal_batch,
                            double step) {
    if (recent_batches.empty()) return 0.0;
    const double sum = std::accumulate(recent_batches.begin(), recent_batches.end(), 0.0);
    const double mean = sum / static_cast<double>(recent_batches.size());
    const double target = static_cast<double>(optimal_batch);
    if (mean > target) return -step;
    if (mean < target) return step;
    return 0.0;
}

Scheduler::Scheduler(PolicyConfig config, double window_s, double downlink_ms, std::optional<SwitchLimits> limits)
    : config_(config), window_ms_(window_s * 1000.0), downlink_ms_(downlink_ms), limits_(std::move(limits)) {
    config_.validate();
    if (!(window_s > 0.0)) throw ValidationError("window_s must be > 0");
    if (limits_) limits_->validate();
    if (config_.switch_enabled && !limits_) {
        throw ValidationError("model switching enabled without switch limits");
    }
}

void Scheduler::register_device(std::uint32_t device, TierId tier, double sr_target, double initial_threshold) {
    if (device < index_.size() && index_[device] != std::numeric_limits<std::size_t>::max()) {
        throw ValidationError("device " + std::to_string(device) + " registered twice");
    }
    if (device >= index_.size()) index_.resize(device + 1, std::numeric_limits<std::size_t>::max());
    index_[device] = states_.size();
    ThresholdState s;
    s.device = device;
    s.threshold = std::clamp(initial_threshold, 0.0, 1.0);
    s.tier = std::move(tier);
    s.sr_target = sr_target;
    states_.push_back(std::move(s));
}

ThresholdState& Scheduler::find(std::uint32_t device) {
    if (device >= index_.size() || index_[device] == std::numeric_limits<std::size_t>::max()) {
        throw ValidationError("unknown device " + std::to_string(device));
    }
    return states_[index_[device]];
}

const ThresholdState& Scheduler::state(std::uint32_t device) const {
    return const_cast<Scheduler*>(this)->find(device);
}

std::optional<ThresholdDelivery> Scheduler::handle_sr_update(std::uint32_t device, double sr_update,
                                                             double now_ms) {
    auto& s = find(device);
    s.active = true;
    s.last_update_ms = now_ms;
    if (config_.kind != PolicyKind::MultiTascPP) return std::nullopt;

    const std::size_t n = active_count();
    const double updated = continuous_update(s.sr_target, sr_update, config_.a, s.threshold);
    const auto step = apply_multiplier(s.sr_target, sr_update, updated, s.multiplier, n);
    if (!step) return std::nullopt;
    s.threshold = step->threshold;
    s.multiplier = step->multiplier;
    updates_.push_back({now_ms, device, sr_update, s.threshold, s.multiplier, n});
    return ThresholdDelivery{device, s.threshold, now_ms + downlink_ms_};
}

std::size_t Scheduler::mark_inactive(double now_ms) {
    // Two silent windows plus half a window of slack for in-flight updates.
    const double silence = 2.5 * window_ms_;
    for (auto& s : states_) {
        if (s.active && now_ms - s.last_update_ms > silence) s.active = false;
    }
    return active_count();
}

std::vector<ThresholdDelivery> Scheduler::step_update(const std::deque<std::uint32_t>& recent_batches,
                                                      std::uint32_t optimal_batch, double now_ms) {
    std::vector<ThresholdDelivery> out;
    if (config_.kind != PolicyKind::MultiTascStep) return out;
    const double delta = multitasc_step_delta(recent_batches, optimal_batch, config_.step);
    if (delta == 0.0) return out;
    for (auto& s : states_) {
        s.threshold = std::clamp(s.threshold + delta, 0.0, 1.0);
        updates_.push_back({now_ms, s.device, -1.0, s.threshold, 1.0, active_count()});
        out.push_back({s.device, s.threshold, now_ms + downlink_ms_});
    }
    return out;
}

int Scheduler::check_switch() const {
    if (!config_.switch_enabled || !limits_) return 0;
    return switch_decision(states_, *limits_);
}

std::size_t Scheduler::active_count() const {
    return static_cast<std::size_t>(
        std::count_if(states_.begin(), states_.end(), [](const ThresholdState& s) { return s.active; }));
}

std::optional<double> Scheduler::mean_active_threshold() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : states_) {
        if (!s.active) continue;
        sum += s.threshold;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

}  // namespace edgecasc
