// edgecasc: command-line driver for the cascade inference simulator.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "edgecasc/error.hpp"
#include "edgecasc/rng.hpp"
#include "edgecasc/scenario.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace edgecasc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct CommonArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> policy;
    std::optional<double> slo_ms;
    std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "Scenario YAML file")->required();
    cmd->add_option("--seed", args.seed, "Override the scenario seed");
    cmd->add_option("--policy", args.policy, "Override the policy")
        ->check(CLI::IsMember({"static", "multitasc", "multitascpp"}));
    cmd->add_option("--slo-ms", args.slo_ms, "Override every device template's SLO (ms)");
    cmd->add_option("--out", args.out, "Output root (defaults to the config's output_dir)");
}

ScenarioConfig load_with_overrides(CommonArgs& args) {
    ScenarioConfig config = load_scenario(args.config);
    if (args.seed) config.seed = *args.seed;
    if (args.policy) config.policy.kind = parse_policy_kind(*args.policy);
    if (args.slo_ms) {
        for (auto& t : config.devices) t.slo_ms = *args.slo_ms;
    }
    if (args.out.empty()) args.out = config.output_dir;
    config.validate();
    return config;
}

void print_summary(const RunReport& report) {
    std::cout << report.scenario << " devices=" << report.devices.size() << " seed=" << report.seed
              << " policy=" << report.policy << " throughput=" << report.system_throughput
              << " accuracy=" << report.overall.accuracy << " slo=" << report.overall.slo_satisfaction
              << " switches=" << report.switches.size() << "\n";
}

int cmd_run(CommonArgs& args, std::optional<std::uint64_t> devices, const std::string& event_log) {
    ScenarioConfig config = load_with_overrides(args);
    if (devices) config = with_device_count(config, *devices);
    config.validate();
    std::ofstream log;
    if (!event_log.empty()) {
        if (fs::path(event_log).has_parent_path()) fs::create_directories(fs::path(event_log).parent_path());
        log.open(event_log);
        if (!log) throw ValidationError("cannot open event log '" + event_log + "'");
    }
    const RunReport report = run_scenario(config, args.out, log.is_open() ? &log : nullptr);
    print_summary(report);
    std::cout << "wrote " << run_output_dir(args.out, config) << "\n";
    return kExitOk;
}

int cmd_sweep(CommonArgs& args, const std::vector<std::uint64_t>& devices, std::vector<std::uint64_t> seeds,
              std::size_t threads) {
    ScenarioConfig config = load_with_overrides(args);
    if (seeds.empty() && args.seed) seeds.push_back(*args.seed);
    SweepOptions options;
    options.out_dir = args.out;
    options.threads = threads;
    const SweepResult result = run_sweep(config, devices, seeds, options);
    std::cout << "sweep " << config.name << ": " << devices.size() * seeds.size() << " runs, wrote "
              << (fs::path(args.out) / config.name / "sweep.csv").string() << "\n";
    return kExitOk;
}

int cmd_gen_traces(CommonArgs& args, std::optional<std::uint64_t> samples) {
    ScenarioConfig config = load_with_overrides(args);
    const fs::path dir = fs::path(args.out) / config.name / "traces";
    fs::create_directories(dir);
    for (std::size_t ti = 0; ti < config.devices.size(); ++ti) {
        const auto& t = config.devices[ti];
        if (t.trace.file) {
            std::cout << "skip " << t.name << " (file-backed)\n";
            continue;
        }
        const auto n = samples.value_or(t.n_samples);
        const Trace trace = generate_trace(trace_gen_spec(config, ti, child_seed(config.seed, "trace-file", ti)), n);
        const auto path = dir / (t.name + ".csv");
        write_trace(path.string(), trace);
        std::cout << "wrote " << path.string() << " (" << n << " samples)\n";
    }
    return kExitOk;
}

int cmd_calibrate(CommonArgs& args) {
    ScenarioConfig config = load_with_overrides(args);
    const ScenarioCalibration cal = calibrate_scenario(config);
    const fs::path dir = fs::path(args.out) / config.name / "calibration";
    fs::create_directories(dir);
    nlohmann::ordered_json summary;
    for (std::size_t ti = 0; ti < config.devices.size(); ++ti) {
        const auto& t = config.devices[ti];
        std::ofstream f(dir / (t.name + ".csv"));
        write_calibration(f, cal.curves[ti]);
        auto& entry = summary["templates"][t.name];
        entry["tier"] = t.tier.label;
        for (std::size_t m = 0; m < config.server.catalog.size(); ++m) {
            const auto& id = config.server.catalog[m].model_id();
            entry["static_threshold"][id] = cal.static_threshold[ti][m];
            std::cout << t.name << " " << id << " static_threshold=" << cal.static_threshold[ti][m] << "\n";
        }
    }
    if (cal.switch_limits) {
        summary["switch_limits"]["c_lower"] = cal.switch_limits->c_lower;
        for (const auto& [tier, c] : cal.switch_limits->c_upper) summary["switch_limits"]["c_upper"][tier.label] = c;
        std::cout << "switch c_lower=" << cal.switch_limits->c_lower << "\n";
    }
    std::ofstream(dir / "thresholds.json") << summary.dump(2) << "\n";
    std::cout << "wrote " << dir.string() << "\n";
    return kExitOk;
}

int cmd_schedule(CommonArgs& args, std::optional<std::uint64_t> devices, std::optional<std::uint64_t> samples) {
    ScenarioConfig config = load_with_overrides(args);
    if (devices) config = with_device_count(config, *devices);
    const IntermittentSpec spec = config.intermittent.value_or(IntermittentSpec{});
    const auto expanded = expand_devices(config);
    const fs::path dir = fs::path(args.out) / config.name;
    fs::create_directories(dir);
    const auto path = dir / "intermittent_schedule.csv";
    std::ofstream f(path);
    f.precision(17);
    f << "device,device_id,offline_index,duration_ms\n";
    std::size_t offline = 0;
    for (std::size_t g = 0; g < expanded.size(); ++g) {
        const auto n = samples.value_or(expanded[g].profile.n_samples);
        for (const auto& p : intermittent_schedule_for(spec, g, n, config.seed)) {
            f << g << "," << expanded[g].profile.device_id << "," << p.at_index << "," << p.duration_ms << "\n";
            ++offline;
        }
    }
    std::cout << offline << " of " << expanded.size() << " devices go offline; wrote " << path.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-device cascade inference simulator"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, gen_args, cal_args, sched_args;
    std::optional<std::uint64_t> run_devices, gen_samples, sched_devices, sched_samples;
    std::string event_log;
    std::vector<std::uint64_t> sweep_devices, sweep_seeds;
    std::size_t threads = 0;

    auto* run = app.add_subcommand("run", "Run one scenario to completion");
    add_common(run, run_args);
    run->add_option("--devices", run_devices, "Total device count, split across templates");
    run->add_option("--event-log", event_log, "Write every dispatched event to this file");

    auto* sweep = app.add_subcommand("sweep", "Run a device-count x seed sweep");
    add_common(sweep, sweep_args);
    sweep->add_option("--devices", sweep_devices, "Device counts, e.g. 10,20,30")->delimiter(',')->required();
    sweep->add_option("--seeds", sweep_seeds, "Seeds, e.g. 1,2,3")->delimiter(',');
    sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");

    auto* gen = app.add_subcommand("gen-traces", "Write synthetic traces for each device template");
    add_common(gen, gen_args);
    gen->add_option("--samples", gen_samples, "Samples per trace (defaults to n_samples)");

    auto* cal = app.add_subcommand("calibrate", "Calibrate static thresholds and switch limits");
    add_common(cal, cal_args);

    auto* sched = app.add_subcommand("schedule-intermittent", "Draw offline schedules for every device");
    add_common(sched, sched_args);
    sched->add_option("--devices", sched_devices, "Total device count");
    sched->add_option("--samples", sched_samples, "Samples per device (N)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*run) return cmd_run(run_args, run_devices, event_log);
        if (*sweep) return cmd_sweep(sweep_args, sweep_devices, sweep_seeds, threads);
        if (*gen) return cmd_gen_traces(gen_args, gen_samples);
        if (*cal) return cmd_calibrate(cal_args);
        if (*sched) return cmd_schedule(sched_args, sched_devices, sched_samples);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitRuntime;
}
