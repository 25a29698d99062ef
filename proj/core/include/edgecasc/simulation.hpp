#pragma once

#include <cstdint>
#include <iosfwd>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "edgecasc/device_sim.hpp"
#include "edgecasc/metrics.hpp"
#include "edgecasc/scenario.hpp"
#include "edgecasc/scheduler.hpp"
#include "edgecasc/server_sim.hpp"
#include "edgecasc/sim_engine.hpp"
#include "edgecasc/traces.hpp"

namespace edgecasc {

/// One simulation instance: engine, devices, server, scheduler and metrics wired
/// together. Single-threaded; independent instances share nothing.
class Simulation {
  public:
    Simulation(const ScenarioConfig& config, const ScenarioCalibration& calibration);

    /// Runs to drain (or `until_ms`) and returns the finalized report.
    RunReport run(std::ostream* event_log = nullptr, std::optional<double> until_ms = std::nullopt);

    const Engine& engine() const { return engine_; }
    const std::vector<Device>& devices() const { return devices_; }
    const Server& server() const { return *server_; }
    const Scheduler& scheduler() const { return *scheduler_; }
    const std::vector<Trace>& traces() const { return traces_; }

    using OutcomeObserver = std::function<void(std::uint32_t device, const SampleOutcome&, double now_ms)>;
    /// Called for every finalized sample, in dispatch order.
    void set_outcome_observer(OutcomeObserver observer) { observer_ = std::move(observer); }

  private:
    void dispatch(const SimEvent& ev);
    void record_outcome(std::uint32_t device, const SampleOutcome& outcome);
    void record_server_point();
    void sample_series();
    void schedule_periodic(EventKind kind, double interval_ms);

    ScenarioConfig config_;
    std::vector<Trace> traces_;
    std::vector<Device> devices_;
    std::unique_ptr<Server> server_;
    std::unique_ptr<Scheduler> scheduler_;
    std::unique_ptr<MetricsCollector> metrics_;
    Engine engine_;
    std::map<std::string, double> static_thresholds_;
    std::vector<bool> finished_;
    std::size_t remaining_ = 0;
    bool ended_ = false;
    double window_ms_ = 0.0;
    double series_ms_ = 0.0;
    double last_mean_threshold_ = 0.0;
    OutcomeObserver observer_;
};

}  // namespace edgecasc
