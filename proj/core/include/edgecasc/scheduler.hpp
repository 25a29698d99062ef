#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "edgecasc/core_model.hpp"
#include "edgecasc/switch_limits.hpp"

namespace edgecasc {

enum class PolicyKind { Static, MultiTascStep, MultiTascPP };

const char* to_string(PolicyKind kind);
PolicyKind parse_policy_kind(const std::string& name);

struct InitialThreshold {
    bool calibrated = true;  // use the Static calibration for the tier/model pair
    double value = 0.0;      // used when !calibrated
};

struct PolicyConfig {
    PolicyKind kind = PolicyKind::MultiTascPP;
    double a = 0.005;
    bool switch_enabled = false;
    double step = 0.05;
    /// B* for the batch-size baseline. 0 means max_batch/2 of the deployed model.
    std::uint32_t optimal_batch = 0;
    InitialThreshold initial;

    void validate() const;
};

struct ThresholdState {
    std::uint32_t device = 0;
    double threshold = 0.0;
    double multiplier = 1.0;
    TierId tier;
    double sr_target = 95.0;
    double last_update_ms = 0.0;
    bool active = true;
};

/// Proportional step on the SR error; unclamped.
double continuous_update(double sr_target, double sr_update, double a, double threshold);

struct MultiplierStep {
    double threshold = 0.0;   // clamped to [0,1]
    double multiplier = 1.0;  // next multiplier, >= 1
};

/// Compounding scale-up while the device over-achieves its target, reset
/// otherwise. nullopt when there are no active devices (update skipped).
std::optional<MultiplierStep> apply_multiplier(double sr_target, double sr_update, double thresh_updated,
                                               double multiplier, std::size_t active_devices);

/// -1: some tier has every active device below c_lower. +1: every active device
/// sits above its tier's c_upper. 0 otherwise. -1 takes precedence.
int switch_decision(std::span<const ThresholdState> states, const SwitchLimits& limits);

/// Model to move to for a switch decision, or nullopt when already at the end.
std::optional<std::size_t> switch_target(std::span<const ServerModelProfile> catalog, std::size_t deployed,
                                         int decision);

/// Threshold delta of the batch-size baseline: -step when the mean recent batch
/// exceeds B*, +step below it, 0 when equal or without history.
double multitasc_step_delta(const std::deque<std::uint32_t>& recent_batches, std::uint32_t optimal_batch,
                            double step);

struct ThresholdDelivery {
    std::uint32_t device = 0;
    double threshold = 0.0;
    double deliver_at_ms = 0.0;
};

struct UpdateRecord {
    double time_ms = 0.0;
    std::uint32_t device = 0;
    double sr_update = 0.0;
    double threshold = 0.0;
    double multiplier = 1.0;
    std::size_t active = 0;
};

/// Server-resident threshold policy and per-device state table.
class Scheduler {
  public:
    Scheduler(PolicyConfig config, double window_s, double downlink_ms,
              std::optional<SwitchLimits> limits = std::nullopt);

    void register_device(std::uint32_t device, TierId tier, double sr_target, double initial_threshold);

    std::optional<ThresholdDelivery> handle_sr_update(std::uint32_t device, double sr_update, double now_ms);

    /// Flags devices silent for more than two windows; returns the active count.
    std::size_t mark_inactive(double now_ms);

    std::vector<ThresholdDelivery> step_update(const std::deque<std::uint32_t>& recent_batches,
                                               std::uint32_t optimal_batch, double now_ms);

    /// Switch decision over the active devices; 0 when switching is off or none are active.
    int check_switch() const;

    std::size_t active_count() const;
    /// Mean threshold over active devices; nullopt when none are active.
    std::optional<double> mean_active_threshold() const;

    const PolicyConfig& config() const { return config_; }
    const std::vector<ThresholdState>& states() const { return states_; }
    const ThresholdState& state(std::uint32_t device) const;
    const std::vector<UpdateRecord>& updates() const { return updates_; }
    const std::optional<SwitchLimits>& limits() const { return limits_; }

  private:
    ThresholdState& find(std::uint32_t device);

    PolicyConfig config_;
    double window_ms_;
    double downlink_ms_;
    std::optional<SwitchLimits> limits_;
    std::vector<ThresholdState> states_;
    std::vector<std::size_t> index_;  // device id -> states_ position
    std::vector<UpdateRecord> updates_;
};

}  // namespace edgecasc
