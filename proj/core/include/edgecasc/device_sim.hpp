#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "edgecasc/core_model.hpp"
#include "edgecasc/rng.hpp"
#include "edgecasc/sim_engine.hpp"
#include "edgecasc/traces.hpp"

namespace edgecasc {

struct NetworkDelays {
    double uplink_ms = 0.0;
    double downlink_ms = 0.0;
};

enum class Decision { Keep, Forward };

/// Keep iff bvsb >= threshold.
Decision decide(double bvsb, double threshold);

enum class Origin { Local, Server };

struct SampleOutcome {
    std::uint64_t sample_id = 0;
    Origin origin = Origin::Local;
    double latency_ms = 0.0;
    bool slo_met = false;
    bool correct = false;
};

struct OfflinePeriod {
    std::uint64_t at_index = 0;
    double duration_ms = 0.0;

    friend bool operator==(const OfflinePeriod&, const OfflinePeriod&) = default;
};

using OfflineSchedule = std::vector<OfflinePeriod>;

struct DeviceOptions {
    double window_s = 1.5;
    NetworkDelays network;
    /// Multiplicative uniform jitter on local latency, +-percent. 0 disables.
    double noise_pct = 0.0;
    std::uint64_t noise_seed = 0;
};

struct DeviceCounters {
    std::uint64_t local = 0;
    std::uint64_t server = 0;
    std::uint64_t correct = 0;
    std::uint64_t slo_met = 0;
    std::uint64_t windows_reported = 0;
    std::uint64_t windowed_samples = 0;
};

/// One IoT device: back-to-back local inference over its trace, threshold-based
/// forwarding, per-window SLO accounting and scheduled offline periods.
class Device {
  public:
    Device(std::uint32_t index, DeviceProfile profile, std::span<const TraceRecord> trace,
           double initial_threshold, OfflineSchedule offline, DeviceOptions options);

    std::uint32_t index() const { return index_; }
    const DeviceProfile& profile() const { return profile_; }

    /// Schedules the first inference and window tick relative to engine.now().
    void start(Engine& engine);

    /// Finishes the sample at the cursor. Returns the outcome if it stays local.
    std::optional<SampleOutcome> on_inference_complete(Engine& engine);

    /// Returns the window's SR (percent) when the device is online and saw
    /// completions. Reschedules itself while the device has work left.
    std::optional<double> on_window_tick(Engine& engine);

    SampleOutcome on_result(Engine& engine, std::uint64_t sample_id, bool heavy_correct);

    void on_offline(Engine& engine);
    void on_online(Engine& engine);

    void apply_threshold(double threshold);

    double threshold() const { return threshold_; }
    std::uint64_t cursor() const { return cursor_; }
    bool online() const { return online_; }
    bool done_generating() const { return cursor_ >= n_samples_; }
    bool finished() const { return done_generating() && outstanding_.empty(); }
    std::uint64_t n_samples() const { return n_samples_; }
    std::size_t outstanding() const { return outstanding_.size(); }
    std::vector<std::uint64_t> outstanding_ids() const;
    std::uint64_t window_hits() const { return window_hits_; }
    std::uint64_t window_total() const { return window_total_; }
    const DeviceCounters& counters() const { return counters_; }

  private:
    double sample_latency();
    void schedule_next_inference(Engine& engine);
    bool maybe_go_offline(Engine& engine);
    void count(const SampleOutcome& outcome);

    std::uint32_t index_;
    DeviceProfile profile_;
    std::span<const TraceRecord> trace_;
    std::uint64_t n_samples_;
    double threshold_;
    OfflineSchedule offline_;
    std::size_t next_offline_ = 0;
    DeviceOptions options_;
    Rng noise_rng_;

    std::uint64_t cursor_ = 0;
    double current_start_ms_ = 0.0;
    double current_latency_ms_ = 0.0;
    bool online_ = true;
    bool inferring_ = false;
    bool ticking_ = false;
    std::uint64_t window_hits_ = 0;
    std::uint64_t window_total_ = 0;
    std::unordered_map<std::uint64_t, double> outstanding_;  // sample id -> inference start
    DeviceCounters counters_;
};

}  // namespace edgecasc
