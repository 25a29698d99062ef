#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgecasc/core_model.hpp"
#include "edgecasc/device_sim.hpp"
#include "edgecasc/metrics.hpp"
#include "edgecasc/scheduler.hpp"
#include "edgecasc/traces.hpp"

namespace edgecasc {

inline constexpr int kSchemaVersion = 1;

/// Where a device template's samples come from: a trace file, or the
/// synthetic generator (heavy accuracies come from the server catalog).
struct TraceSourceConfig {
    std::optional<std::string> file;
    double light_accuracy = 0.7185;
    std::pair<double, double> correct_shape{8.0, 2.0};
    std::pair<double, double> incorrect_shape{2.0, 5.0};
    /// Per server model P(heavy correct | light wrong); absent -> nested default.
    std::map<std::string, double> heavy_given_light_wrong;
};

/// `count` identical devices of one tier.
struct DeviceTemplate {
    std::string name;
    TierId tier;
    std::uint64_t count = 1;
    double t_inf_ms = 31.0;
    double slo_ms = 100.0;
    std::optional<double> sr_target;
    std::uint64_t n_samples = 5000;
    TraceSourceConfig trace;
};

struct ServerConfig {
    std::vector<ServerModelProfile> catalog;
    std::string deployed;
    double swap_delay_ms = 0.0;
    std::optional<double> cooldown_s;  // absent -> 10 * window_s
    std::size_t history = 32;
};

struct CalibrationConfig {
    std::uint64_t samples = 10000;
    double grid_step = kDefaultGridStep;
    double q_low = 0.05;
    double q_high = 0.60;
    std::uint64_t seed = 20240101;
};

struct MetricsConfig {
    double running_window_s = 10.0;
    std::optional<double> series_interval_s;  // absent -> window_s
};

enum class DurationFamily { Alpha, Exponential };

struct DurationSpec {
    DurationFamily family = DurationFamily::Alpha;
    double shape = 60.0;     // alpha family shape
    double median_s = 60.0;  // alpha family: scale is chosen to hit this median
    double mean_s = 60.0;    // exponential family

    void validate() const;
};

struct IntermittentSpec {
    double offline_probability = 0.5;
    double point_mean_fraction = 0.5;  // of N
    double point_std_fraction = 0.2;   // of N
    DurationSpec duration;

    void validate() const;
};

struct ScenarioConfig {
    int schema_version = kSchemaVersion;
    std::string name = "scenario";
    std::uint64_t seed = 1;
    std::vector<DeviceTemplate> devices;
    ServerConfig server;
    PolicyConfig policy;
    SLOPolicy slo;
    NetworkDelays network;
    double noise_pct = 0.0;
    std::optional<IntermittentSpec> intermittent;
    CalibrationConfig calibration;
    MetricsConfig metrics;
    std::string output_dir = "out";

    std::uint64_t device_count() const;
    /// Throws ValidationError on the first violated constraint; checks trace files exist.
    void validate() const;
};

ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig parse_scenario_string(const std::string& yaml);
ScenarioConfig load_scenario(const std::string& path);

/// Canonical YAML: every default spelled out, model names expanded to profiles.
std::string serialize_scenario(const ScenarioConfig& config);

std::string config_digest(const ScenarioConfig& config);

/// Spreads `total` devices over the templates (equal shares, remainder to the first).
ScenarioConfig with_device_count(ScenarioConfig config, std::uint64_t total);

/// Inverse standard normal CDF.
double normal_quantile(double p);

double sample_offline_duration_ms(const DurationSpec& spec, Rng& rng);

/// Offline schedule of one device, drawn from its own stream.
OfflineSchedule intermittent_schedule_for(const IntermittentSpec& spec, std::uint64_t device_index,
                                          std::uint64_t n_samples, std::uint64_t seed);

std::vector<OfflineSchedule> gen_intermittent_schedule(const IntermittentSpec& spec, std::uint64_t devices,
                                                       std::uint64_t n_samples, std::uint64_t seed);

/// Offline calibration results for a scenario.
struct ScenarioCalibration {
    std::vector<CalibrationCurve> curves;  // one per device template
    /// static_threshold[template][model]
    std::vector<std::vector<double>> static_threshold;
    std::optional<SwitchLimits> switch_limits;
};

ScenarioCalibration calibrate_scenario(const ScenarioConfig& config);

struct ExpandedDevice {
    std::size_t template_index = 0;
    DeviceProfile profile;
};

/// One entry per device, templates in order; device ids are `<name>-<k>`.
std::vector<ExpandedDevice> expand_devices(const ScenarioConfig& config);

/// Generator settings for a template; heavy models follow the catalog order.
TraceGenSpec trace_gen_spec(const ScenarioConfig& config, std::size_t template_index, std::uint64_t seed);

/// The samples device `device_index` runs, columns aligned with the catalog.
Trace device_trace(const ScenarioConfig& config, std::size_t template_index, std::uint64_t device_index);

/// Runs the scenario to drain. Writes outputs when `out_dir` is given.
RunReport run_scenario(const ScenarioConfig& config, const std::optional<std::string>& out_dir = std::nullopt,
                       std::ostream* event_log = nullptr);

/// `<out>/<scenario>/<count>devices/seed<k>`
std::string run_output_dir(const std::string& out, const ScenarioConfig& config);

struct SweepOptions {
    std::optional<std::string> out_dir;
    std::size_t threads = 0;  // 0 -> hardware concurrency
    bool keep_runs = false;
};

struct SweepResult {
    SweepReport report;
    std::vector<SweepRun> runs;  // populated when keep_runs
};

SweepResult run_sweep(const ScenarioConfig& config, const std::vector<std::uint64_t>& device_counts,
                      const std::vector<std::uint64_t>& seeds, const SweepOptions& options = {});

}  // namespace edgecasc
