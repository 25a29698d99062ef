#include "fixtures.hpp"

#include <atomic>
#include <filesystem>
#include <unistd.h>

namespace edgecasc::testing {

Trace trace_from_bvsb(const std::vector<double>& bvsb, std::size_t models) {
    Trace t;
    for (std::size_t m = 0; m < models; ++m) t.model_ids.push_back("M" + std::to_string(m));
    for (std::size_t i = 0; i < bvsb.size(); ++i) {
        t.records.push_back({i, bvsb[i], bvsb[i] >= 0.5, std::vector<std::uint8_t>(models, 1)});
    }
    return t;
}

Trace uniform_trace(std::size_t n, std::size_t models) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    return trace_from_bvsb(v, models);
}

ScenarioConfig single_device_config(std::uint64_t n_samples, double threshold) {
    ScenarioConfig c = homogeneous_config("InceptionV3", 1, 100.0, PolicyKind::Static, n_samples);
    c.name = "single";
    c.policy.initial.calibrated = false;
    c.policy.initial.value = threshold;
    c.calibration.samples = 2000;
    return c;
}

ScenarioConfig homogeneous_config(const std::string& server_model, std::uint64_t devices, double slo_ms,
                                  PolicyKind policy, std::uint64_t n_samples) {
    ScenarioConfig c;
    c.name = "homogeneous_" + server_model;
    c.seed = 1;
    DeviceTemplate t;
    t.name = "low";
    t.tier = kTierLow;
    t.count = devices;
    t.t_inf_ms = 31.0;
    t.slo_ms = slo_ms;
    t.n_samples = n_samples;
    c.devices.push_back(t);
    c.server.catalog = {default_server_model(server_model)};
    c.server.deployed = server_model;
    c.policy.kind = policy;
    return c;
}

ScenarioConfig heterogeneous_config(std::uint64_t devices, PolicyKind policy) {
    ScenarioConfig c = homogeneous_config("InceptionV3", 1, 100.0, policy);
    c.name = "heterogeneous";
    c.devices.clear();
    for (const auto& light : default_light_models()) {
        if (light.tier == kTierLow || light.tier == kTierMid || light.tier == kTierHigh) {
            DeviceTemplate t;
            t.name = light.tier.label;
            t.tier = light.tier;
            t.t_inf_ms = light.t_inf_ms;
            t.trace.light_accuracy = light.accuracy;
            t.slo_ms = 100.0;
            c.devices.push_back(t);
        }
    }
    return with_device_count(c, devices);
}

std::string scratch_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("edgecasc_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace edgecasc::testing
