#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgecasc/core_model.hpp"
#include "edgecasc/device_sim.hpp"
#include "edgecasc/scheduler.hpp"
#include "edgecasc/server_sim.hpp"

namespace edgecasc {

struct DeviceReport {
    std::string device_id;
    TierId tier;
    std::uint64_t n_samples = 0;
    std::uint64_t outcomes = 0;
    std::uint64_t local = 0;
    std::uint64_t server = 0;
    std::uint64_t correct = 0;
    std::uint64_t slo_met = 0;
    double accuracy = 0.0;          // [0,1]
    double slo_satisfaction = 0.0;  // [0,100]
    bool excluded = false;          // no outcomes; left out of averages
};

struct AggregateReport {
    std::uint64_t devices = 0;
    std::uint64_t outcomes = 0;
    std::uint64_t forwarded = 0;
    double accuracy = 0.0;
    double slo_satisfaction = 0.0;
};

struct SeriesPoint {
    double time_ms = 0.0;
    std::size_t active_devices = 0;
    double mean_threshold = 0.0;
    std::optional<double> running_sr;        // percent; empty window -> nullopt
    std::optional<double> running_accuracy;  // [0,1]
    std::size_t queue_len = 0;
    std::string deployed_model;
    std::uint32_t batch_size = 0;
};

struct ServerPoint {
    double time_ms = 0.0;
    std::size_t queue_len = 0;
    std::uint32_t batch_size = 0;
    std::string deployed_model;
};

struct RunReport {
    std::string scenario;
    std::string config_digest;
    std::string policy;
    std::uint64_t seed = 0;
    std::vector<DeviceReport> devices;
    std::map<std::string, AggregateReport> tiers;
    AggregateReport overall;
    double system_throughput = 0.0;  // samples/s over the makespan
    double makespan_ms = 0.0;
    std::uint64_t total_samples = 0;
    std::map<std::string, double> static_thresholds;  // tier -> calibrated threshold
    std::vector<SwitchRecord> switches;
    std::vector<SeriesPoint> series;
    std::vector<ServerPoint> server_series;
    std::vector<UpdateRecord> updates;
    std::uint64_t events_dispatched = 0;
};

/// Outcome and time-series collector for one simulation instance.
class MetricsCollector {
  public:
    struct DeviceInfo {
        std::string device_id;
        TierId tier;
        std::uint64_t n_samples = 0;
    };

    explicit MetricsCollector(std::vector<DeviceInfo> devices, double running_window_s = 10.0);

    void record_outcome(std::uint32_t device, const SampleOutcome& outcome, double now_ms);

    /// Running SR / accuracy over outcomes finalized in (now - window, now].
    std::optional<double> running_sr(double now_ms);
    std::optional<double> running_accuracy(double now_ms);

    void record_series(SeriesPoint point);
    void record_server(ServerPoint point);

    std::uint64_t total_outcomes() const { return total_outcomes_; }
    double last_outcome_ms() const { return last_outcome_ms_; }

    /// Throws SimulationError listing stuck samples when `outstanding` is non-empty.
    RunReport finalize(const std::map<std::uint32_t, std::vector<std::uint64_t>>& outstanding) const;

  private:
    void prune(double now_ms);

    struct Recent {
        double time_ms;
        bool slo_met;
        bool correct;
    };

    std::vector<DeviceInfo> info_;
    std::vector<DeviceReport> per_device_;
    double window_ms_;
    std::deque<Recent> recent_;
    std::uint64_t recent_hits_ = 0;
    std::uint64_t recent_correct_ = 0;
    std::uint64_t total_outcomes_ = 0;
    double last_outcome_ms_ = 0.0;
    std::vector<SeriesPoint> series_;
    std::vector<ServerPoint> server_series_;
};

void write_report_json(std::ostream& out, const RunReport& report);
void write_series_csv(std::ostream& out, const std::vector<SeriesPoint>& series);
void write_server_series_csv(std::ostream& out, const std::vector<ServerPoint>& series);
void write_updates_csv(std::ostream& out, const std::vector<UpdateRecord>& updates);

/// Writes report.json, timeseries.csv, server_series.csv and updates.csv into `dir`.
void write_run_outputs(const std::string& dir, const RunReport& report);

struct SweepCell {
    std::size_t devices = 0;
    std::size_t seed_count = 0;
    std::string metric;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct SweepReport {
    std::vector<std::size_t> axis;
    std::vector<SweepCell> cells;

    /// Cell for (devices, metric); throws std::out_of_range if absent.
    const SweepCell& at(std::size_t devices, const std::string& metric) const;
};

/// Scalar metrics of one run keyed by name: throughput, accuracy,
/// slo_satisfaction, makespan_s, forward_fraction, switches, and
/// tier.<label>.accuracy / tier.<label>.slo_satisfaction.
std::map<std::string, double> run_metrics(const RunReport& report);

struct SweepRun {
    std::size_t devices = 0;
    std::uint64_t seed = 0;
    RunReport report;
};

SweepReport aggregate_sweep(const std::vector<SweepRun>& runs);

/// Table `devices,seed_count,metric,mean,min,max`.
void write_sweep_csv(std::ostream& out, const SweepReport& sweep);

}  // namespace edgecasc
