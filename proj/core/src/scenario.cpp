#include "edgecasc/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "edgecasc/error.hpp"
#include "edgecasc/rng.hpp"
#include "edgecasc/simulation.hpp"

namespace edgecasc {

// ---------------------------------------------------------------------------
// Validation

void DurationSpec::validate() const {
    if (family == DurationFamily::Alpha) {
        if (!(shape > 0.0)) throw ValidationError("alpha duration shape must be > 0");
        if (!(median_s > 0.0)) throw ValidationError("alpha duration median_s must be > 0");
    } else if (!(mean_s > 0.0)) {
        throw ValidationError("exponential duration mean_s must be > 0");
    }
}

void IntermittentSpec::validate() const {
    if (!(offline_probability >= 0.0 && offline_probability <= 1.0)) {
        throw ValidationError("offline_probability must lie in [0,1]");
    }
    if (!(point_std_fraction >= 0.0)) throw ValidationError("offline point std must be >= 0");
    duration.validate();
}

std::uint64_t ScenarioConfig::device_count() const {
    std::uint64_t n = 0;
    for (const auto& t : devices) n += t.count;
    return n;
}

void ScenarioConfig::validate() const {
    if (schema_version != kSchemaVersion) {
        throw ValidationError("unsupported schema_version " + std::to_string(schema_version));
    }
    if (name.empty()) throw ValidationError("scenario name must not be empty");
    if (devices.empty()) throw ValidationError("scenario needs at least one device template");
    slo.validate();
    policy.validate();
    if (server.catalog.empty()) throw ValidationError("server catalog is empty");
    bool deployed_found = false;
    for (std::size_t i = 0; i < server.catalog.size(); ++i) {
        const auto& id = server.catalog[i].model_id();
        if (id == server.deployed) deployed_found = true;
        for (std::size_t j = 0; j < i; ++j) {
            if (server.catalog[j].model_id() == id) throw ValidationError("duplicate server model '" + id + "'");
        }
    }
    if (!deployed_found) {
        throw ValidationError("deployed model '" + server.deployed + "' is not in the server catalog");
    }
    if (server.swap_delay_ms < 0.0) throw ValidationError("swap_delay_ms must be >= 0");
    if (server.cooldown_s && *server.cooldown_s < 0.0) throw ValidationError("cooldown_s must be >= 0");
    if (network.uplink_ms < 0.0 || network.downlink_ms < 0.0) throw ValidationError("network delays must be >= 0");
    if (noise_pct < 0.0 || noise_pct >= 100.0) throw ValidationError("noise_pct must lie in [0,100)");
    if (!(calibration.grid_step > 0.0 && calibration.grid_step <= 1.0)) {
        throw ValidationError("calibration grid_step must lie in (0,1]");
    }
    if (calibration.samples == 0) throw ValidationError("calibration samples must be > 0");
    if (!(calibration.q_low > 0.0 && calibration.q_low < calibration.q_high && calibration.q_high < 1.0)) {
        throw ValidationError("calibration needs 0 < q_low < q_high < 1");
    }
    if (!(metrics.running_window_s > 0.0)) throw ValidationError("running_window_s must be > 0");
    if (metrics.series_interval_s && !(*metrics.series_interval_s > 0.0)) {
        throw ValidationError("series_interval_s must be > 0");
    }
    if (intermittent) intermittent->validate();

    for (std::size_t i = 0; i < devices.size(); ++i) {
        const auto& t = devices[i];
        for (std::size_t j = 0; j < i; ++j) {
            if (devices[j].name == t.name) throw ValidationError("duplicate device template name '" + t.name + "'");
        }
        DeviceProfile probe{t.name, t.tier, t.t_inf_ms, t.slo_ms, t.sr_target.value_or(slo.sr_target_default),
                            t.n_samples, ""};
        probe.validate();
        if (t.tier.label.empty()) throw ValidationError("device template '" + t.name + "' has an empty tier");
        if (t.trace.file) {
            if (!std::filesystem::exists(*t.trace.file)) {
                throw ValidationError("trace file '" + *t.trace.file + "' does not exist");
            }
        } else {
            TraceGenSpec spec = trace_gen_spec(*this, i, 0);
            spec.validate();
        }
        for (const auto& [model, p] : t.trace.heavy_given_light_wrong) {
            auto it = std::find_if(server.catalog.begin(), server.catalog.end(),
                                   [&](const ServerModelProfile& m) { return m.model_id() == model; });
            if (it == server.catalog.end()) {
                throw ValidationError("device template '" + t.name + "' sets a conditional for unknown model '" +
                                      model + "'");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// YAML

namespace {

template <typename T>
T get_or(const YAML::Node& node, const char* key, T fallback) {
    if (!node || !node[key]) return fallback;
    return node[key].as<T>();
}

void reject_unknown(const YAML::Node& node, std::initializer_list<const char*> known, const std::string& where) {
    if (!node || !node.IsMap()) return;
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
            throw ValidationError("unknown key '" + key + "' in " + where);
        }
    }
}

std::pair<double, double> parse_pair(const YAML::Node& node, std::pair<double, double> fallback) {
    if (!node) return fallback;
    if (!node.IsSequence() || node.size() != 2) throw ValidationError("shape must be a two-element list");
    return {node[0].as<double>(), node[1].as<double>()};
}

ServerModelProfile parse_model(const YAML::Node& node) {
    if (node.IsScalar()) return default_server_model(node.as<std::string>());
    reject_unknown(node, {"id", "accuracy", "latency_anchors", "max_batch", "marginal_cost_ms"}, "server model");
    const auto id = node["id"].as<std::string>();
    std::optional<ServerModelProfile> base;
    try {
        base = default_server_model(id);
    } catch (const ValidationError&) {
    }
    const double accuracy = node["accuracy"] ? node["accuracy"].as<double>()
                                             : (base ? base->accuracy() : throw ValidationError("model '" + id + "' needs accuracy"));
    std::vector<LatencyAnchor> anchors;
    if (node["latency_anchors"]) {
        for (const auto& a : node["latency_anchors"]) {
            if (!a.IsSequence() || a.size() != 2) throw ValidationError("latency anchor must be [batch, latency_ms]");
            anchors.push_back({a[0].as<std::uint32_t>(), a[1].as<double>()});
        }
    } else if (base) {
        anchors = base->anchors();
    } else {
        throw ValidationError("model '" + id + "' needs latency_anchors");
    }
    const auto max_batch = get_or<std::uint32_t>(node, "max_batch", base ? base->max_batch() : 64);
    const double marginal = get_or<double>(node, "marginal_cost_ms", -1.0);
    return ServerModelProfile(id, accuracy, std::move(anchors), max_batch, marginal);
}

DeviceTemplate parse_template(const YAML::Node& node, std::size_t index) {
    reject_unknown(node,
                   {"name", "tier", "light_model", "count", "t_inf_ms", "slo_ms", "sr_target", "n_samples", "trace"},
                   "device template");
    DeviceTemplate t;
    std::optional<LightModelDefaults> light;
    if (node["light_model"]) {
        const auto id = node["light_model"].as<std::string>();
        for (const auto& l : default_light_models()) {
            if (l.model_id == id) light = l;
        }
        if (!light) throw ValidationError("unknown light model '" + id + "'");
        t.tier = light->tier;
        t.t_inf_ms = light->t_inf_ms;
        t.trace.light_accuracy = light->accuracy;
    }
    if (node["tier"]) t.tier = TierId{node["tier"].as<std::string>()};
    if (t.tier.label.empty()) t.tier = kTierLow;
    t.name = get_or<std::string>(node, "name", t.tier.label.empty() ? "dev" + std::to_string(index) : t.tier.label);
    t.count = get_or<std::uint64_t>(node, "count", t.count);
    t.t_inf_ms = get_or<double>(node, "t_inf_ms", t.t_inf_ms);
    t.slo_ms = get_or<double>(node, "slo_ms", t.slo_ms);
    if (node["sr_target"]) t.sr_target = node["sr_target"].as<double>();
    t.n_samples = get_or<std::uint64_t>(node, "n_samples", t.n_samples);
    if (const auto tr = node["trace"]) {
        reject_unknown(tr, {"file", "light_accuracy", "correct_shape", "incorrect_shape", "heavy_given_light_wrong"},
                       "trace");
        if (tr["file"]) t.trace.file = tr["file"].as<std::string>();
        t.trace.light_accuracy = get_or<double>(tr, "light_accuracy", t.trace.light_accuracy);
        t.trace.correct_shape = parse_pair(tr["correct_shape"], t.trace.correct_shape);
        t.trace.incorrect_shape = parse_pair(tr["incorrect_shape"], t.trace.incorrect_shape);
        if (const auto h = tr["heavy_given_light_wrong"]) {
            for (const auto& kv : h) t.trace.heavy_given_light_wrong[kv.first.as<std::string>()] = kv.second.as<double>();
        }
    }
    return t;
}

ScenarioConfig parse_node(const YAML::Node& root) {
    if (!root || !root.IsMap()) throw ParseError("scenario config must be a mapping");
    reject_unknown(root,
                   {"schema_version", "name", "seed", "devices", "server", "policy", "slo", "network", "noise_pct",
                    "intermittent", "calibration", "metrics", "output_dir"},
                   "scenario");
    ScenarioConfig c;
    c.schema_version = get_or<int>(root, "schema_version", 0);
    if (c.schema_version != kSchemaVersion) {
        throw ValidationError("schema_version must be " + std::to_string(kSchemaVersion));
    }
    c.name = get_or<std::string>(root, "name", c.name);
    c.seed = get_or<std::uint64_t>(root, "seed", c.seed);
    c.noise_pct = get_or<double>(root, "noise_pct", c.noise_pct);
    c.output_dir = get_or<std::string>(root, "output_dir", c.output_dir);

    if (const auto s = root["slo"]) {
        reject_unknown(s, {"window_s", "sr_target"}, "slo");
        c.slo.window_s = get_or<double>(s, "window_s", c.slo.window_s);
        c.slo.sr_target_default = get_or<double>(s, "sr_target", c.slo.sr_target_default);
    }

    const auto devs = root["devices"];
    if (!devs || !devs.IsSequence()) throw ValidationError("'devices' must be a list of device templates");
    for (std::size_t i = 0; i < devs.size(); ++i) c.devices.push_back(parse_template(devs[i], i));

    const auto srv = root["server"];
    if (!srv) throw ValidationError("missing 'server' section");
    reject_unknown(srv, {"deployed", "models", "swap_delay_ms", "cooldown_s", "history"}, "server");
    if (srv["models"]) {
        for (const auto& m : srv["models"]) c.server.catalog.push_back(parse_model(m));
    } else {
        c.server.catalog = default_server_models();
    }
    c.server.deployed = get_or<std::string>(srv, "deployed", c.server.catalog.front().model_id());
    c.server.swap_delay_ms = get_or<double>(srv, "swap_delay_ms", c.server.swap_delay_ms);
    if (srv["cooldown_s"]) c.server.cooldown_s = srv["cooldown_s"].as<double>();
    c.server.history = get_or<std::size_t>(srv, "history", c.server.history);

    if (const auto p = root["policy"]) {
        reject_unknown(p, {"kind", "a", "switch_enabled", "step", "optimal_batch", "initial_threshold"}, "policy");
        if (p["kind"]) c.policy.kind = parse_policy_kind(p["kind"].as<std::string>());
        c.policy.a = get_or<double>(p, "a", c.policy.a);
        c.policy.switch_enabled = get_or<bool>(p, "switch_enabled", c.policy.switch_enabled);
        c.policy.step = get_or<double>(p, "step", c.policy.step);
        c.policy.optimal_batch = get_or<std::uint32_t>(p, "optimal_batch", c.policy.optimal_batch);
        if (const auto init = p["initial_threshold"]) {
            if (init.as<std::string>() == "calibrated") {
                c.policy.initial.calibrated = true;
            } else {
                c.policy.initial.calibrated = false;
                c.policy.initial.value = init.as<double>();
            }
        }
    }
    if (const auto n = root["network"]) {
        reject_unknown(n, {"uplink_ms", "downlink_ms"}, "network");
        c.network.uplink_ms = get_or<double>(n, "uplink_ms", 0.0);
        c.network.downlink_ms = get_or<double>(n, "downlink_ms", 0.0);
    }
    if (const auto cal = root["calibration"]) {
        reject_unknown(cal, {"samples", "grid_step", "q_low", "q_high", "seed"}, "calibration");
        c.calibration.samples = get_or<std::uint64_t>(cal, "samples", c.calibration.samples);
        c.calibration.grid_step = get_or<double>(cal, "grid_step", c.calibration.grid_step);
        c.calibration.q_low = get_or<double>(cal, "q_low", c.calibration.q_low);
        c.calibration.q_high = get_or<double>(cal, "q_high", c.calibration.q_high);
        c.calibration.seed = get_or<std::uint64_t>(cal, "seed", c.calibration.seed);
    }
    if (const auto m = root["metrics"]) {
        reject_unknown(m, {"running_window_s", "series_interval_s"}, "metrics");
        c.metrics.running_window_s = get_or<double>(m, "running_window_s", c.metrics.running_window_s);
        if (m["series_interval_s"]) c.metrics.series_interval_s = m["series_interval_s"].as<double>();
    }
    if (const auto im = root["intermittent"]) {
        reject_unknown(im, {"offline_probability", "point_mean_fraction", "point_std_fraction", "duration"},
                       "intermittent");
        IntermittentSpec spec;
        spec.offline_probability = get_or<double>(im, "offline_probability", spec.offline_probability);
        spec.point_mean_fraction = get_or<double>(im, "point_mean_fraction", spec.point_mean_fraction);
        spec.point_std_fraction = get_or<double>(im, "point_std_fraction", spec.point_std_fraction);
        if (const auto d = im["duration"]) {
            reject_unknown(d, {"family", "shape", "median_s", "mean_s"}, "intermittent.duration");
            const auto family = get_or<std::string>(d, "family", "alpha");
            if (family == "alpha") {
                spec.duration.family = DurationFamily::Alpha;
            } else if (family == "exponential") {
                spec.duration.family = DurationFamily::Exponential;
            } else {
                throw ValidationError("unknown duration family '" + family + "' (alpha|exponential)");
            }
            spec.duration.shape = get_or<double>(d, "shape", spec.duration.shape);
            spec.duration.median_s = get_or<double>(d, "median_s", spec.duration.median_s);
            spec.duration.mean_s = get_or<double>(d, "mean_s", spec.duration.mean_s);
        }
        c.intermittent = spec;
    }
    return c;
}

}  // namespace

ScenarioConfig parse_scenario(std::istream& in) {
    YAML::Node root;
    try {
        root = YAML::Load(in);
    } catch (const YAML::ParserException& e) {
        throw ParseError(e.what(), static_cast<std::size_t>(e.mark.line + 1));
    }
    try {
        return parse_node(root);
    } catch (const YAML::Exception& e) {
        throw ParseError(e.what(), e.mark.is_null() ? 0 : static_cast<std::size_t>(e.mark.line + 1));
    }
}

ScenarioConfig parse_scenario_string(const std::string& yaml) {
    std::istringstream in(yaml);
    return parse_scenario(in);
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config file '" + path + "' not found or unreadable");
    try {
        return parse_scenario(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string serialize_scenario(const ScenarioConfig& c) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "schema_version" << YAML::Value << c.schema_version;
    out << YAML::Key << "name" << YAML::Value << c.name;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "devices" << YAML::Value << YAML::BeginSeq;
    for (const auto& t : c.devices) {
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << t.name;
        out << YAML::Key << "tier" << YAML::Value << t.tier.label;
        out << YAML::Key << "count" << YAML::Value << t.count;
        out << YAML::Key << "t_inf_ms" << YAML::Value << t.t_inf_ms;
        out << YAML::Key << "slo_ms" << YAML::Value << t.slo_ms;
        if (t.sr_target) out << YAML::Key << "sr_target" << YAML::Value << *t.sr_target;
        out << YAML::Key << "n_samples" << YAML::Value << t.n_samples;
        out << YAML::Key << "trace" << YAML::Value << YAML::BeginMap;
        if (t.trace.file) out << YAML::Key << "file" << YAML::Value << *t.trace.file;
        out << YAML::Key << "light_accuracy" << YAML::Value << t.trace.light_accuracy;
        out << YAML::Key << "correct_shape" << YAML::Value << YAML::Flow << YAML::BeginSeq
            << t.trace.correct_shape.first << t.trace.correct_shape.second << YAML::EndSeq;
        out << YAML::Key << "incorrect_shape" << YAML::Value << YAML::Flow << YAML::BeginSeq
            << t.trace.incorrect_shape.first << t.trace.incorrect_shape.second << YAML::EndSeq;
        if (!t.trace.heavy_given_light_wrong.empty()) {
            out << YAML::Key << "heavy_given_light_wrong" << YAML::Value << YAML::BeginMap;
            for (const auto& [m, p] : t.trace.heavy_given_light_wrong) out << YAML::Key << m << YAML::Value << p;
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "server" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "deployed" << YAML::Value << c.server.deployed;
    out << YAML::Key << "models" << YAML::Value << YAML::BeginSeq;
    for (const auto& m : c.server.catalog) {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << m.model_id();
        out << YAML::Key << "accuracy" << YAML::Value << m.accuracy();
        out << YAML::Key << "latency_anchors" << YAML::Value << YAML::BeginSeq;
        for (const auto& a : m.anchors()) {
            out << YAML::Flow << YAML::BeginSeq << a.batch << a.latency_ms << YAML::EndSeq;
        }
        out << YAML::EndSeq;
        out << YAML::Key << "max_batch" << YAML::Value << m.max_batch();
        out << YAML::Key << "marginal_cost_ms" << YAML::Value << m.marginal_cost_ms();
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "swap_delay_ms" << YAML::Value << c.server.swap_delay_ms;
    if (c.server.cooldown_s) out << YAML::Key << "cooldown_s" << YAML::Value << *c.server.cooldown_s;
    out << YAML::Key << "history" << YAML::Value << c.server.history;
    out << YAML::EndMap;

    out << YAML::Key << "policy" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(c.policy.kind);
    out << YAML::Key << "a" << YAML::Value << c.policy.a;
    out << YAML::Key << "switch_enabled" << YAML::Value << c.policy.switch_enabled;
    out << YAML::Key << "step" << YAML::Value << c.policy.step;
    out << YAML::Key << "optimal_batch" << YAML::Value << c.policy.optimal_batch;
    out << YAML::Key << "initial_threshold" << YAML::Value;
    if (c.policy.initial.calibrated) {
        out << "calibrated";
    } else {
        out << c.policy.initial.value;
    }
    out << YAML::EndMap;

    out << YAML::Key << "slo" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "window_s" << YAML::Value << c.slo.window_s;
    out << YAML::Key << "sr_target" << YAML::Value << c.slo.sr_target_default;
    out << YAML::EndMap;

    out << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "uplink_ms" << YAML::Value << c.network.uplink_ms;
    out << YAML::Key << "downlink_ms" << YAML::Value << c.network.downlink_ms;
    out << YAML::EndMap;
    out << YAML::Key << "noise_pct" << YAML::Value << c.noise_pct;

    if (c.intermittent) {
        const auto& im = *c.intermittent;
        out << YAML::Key << "intermittent" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "offline_probability" << YAML::Value << im.offline_probability;
        out << YAML::Key << "point_mean_fraction" << YAML::Value << im.point_mean_fraction;
        out << YAML::Key << "point_std_fraction" << YAML::Value << im.point_std_fraction;
        out << YAML::Key << "duration" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "family" << YAML::Value
            << (im.duration.family == DurationFamily::Alpha ? "alpha" : "exponential");
        out << YAML::Key << "shape" << YAML::Value << im.duration.shape;
        out << YAML::Key << "median_s" << YAML::Value << im.duration.median_s;
        out << YAML::Key << "mean_s" << YAML::Value << im.duration.mean_s;
        out << YAML::EndMap;
        out << YAML::EndMap;
    }

    out << YAML::Key << "calibration" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "samples" << YAML::Value << c.calibration.samples;
    out << YAML::Key << "grid_step" << YAML::Value << c.calibration.grid_step;
    out << YAML::Key << "q_low" << YAML::Value << c.calibration.q_low;
    out << YAML::Key << "q_high" << YAML::Value << c.calibration.q_high;
    out << YAML::Key << "seed" << YAML::Value << c.calibration.seed;
    out << YAML::EndMap;

    out << YAML::Key << "metrics" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "running_window_s" << YAML::Value << c.metrics.running_window_s;
    if (c.metrics.series_interval_s) {
        out << YAML::Key << "series_interval_s" << YAML::Value << *c.metrics.series_interval_s;
    }
    out << YAML::EndMap;
    out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::string config_digest(const ScenarioConfig& config) {
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(serialize_scenario(config));
    return hex.str();
}

ScenarioConfig with_device_count(ScenarioConfig config, std::uint64_t total) {
    const std::uint64_t k = config.devices.size();
    if (k == 0) throw ValidationError("scenario has no device templates");
    for (std::uint64_t i = 0; i < k; ++i) {
        config.devices[i].count = total / k + (i < total % k ? 1 : 0);
    }
    return config;
}

// ---------------------------------------------------------------------------
// Intermittent participation

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("normal_quantile needs p in (0,1)");
    // Acklam's rational approximation, refined with one Halley step.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double lo = 0.02425;
    double x;
    if (p < lo) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - lo) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

double sample_offline_duration_ms(const DurationSpec& spec, Rng& rng) {
    spec.validate();
    if (spec.family == DurationFamily::Exponential) {
        std::exponential_distribution<double> exp(1.0 / spec.mean_s);
        double s = 0.0;
        while (s <= 0.0) s = exp(rng);
        return s * 1000.0;
    }
    // Alpha(shape): X = scale / Y with Y ~ Normal(shape, 1) truncated to Y > 0.
    // The median of Y solves Phi(y - shape) = Phi(-shape) + Phi(shape) / 2.
    const double phi_a = 0.5 * std::erfc(-spec.shape / std::sqrt(2.0));
    const double y_median = spec.shape + normal_quantile(1.0 - phi_a + 0.5 * phi_a);
    const double scale = spec.median_s * y_median;
    std::normal_distribution<double> normal(spec.shape, 1.0);
    double y = 0.0;
    while (y <= 0.0) y = normal(rng);
    return scale / y * 1000.0;
}

OfflineSchedule intermittent_schedule_for(const IntermittentSpec& spec, std::uint64_t device_index,
                                          std::uint64_t n_samples, std::uint64_t seed) {
    spec.validate();
    OfflineSchedule schedule;
    if (n_samples == 0) return schedule;
    Rng rng = child_rng(seed, "intermittent", device_index);
    std::bernoulli_distribution goes_offline(spec.offline_probability);
    if (!goes_offline(rng)) return schedule;
    const double n = static_cast<double>(n_samples);
    std::normal_distribution<double> point(spec.point_mean_fraction * n, std::max(spec.point_std_fraction * n, 1e-12));
    const double idx = std::clamp(std::round(point(rng)), 0.0, n);
    schedule.push_back({static_cast<std::uint64_t>(idx), sample_offline_duration_ms(spec.duration, rng)});
    return schedule;
}

std::vector<OfflineSchedule> gen_intermittent_schedule(const IntermittentSpec& spec, std::uint64_t devices,
                                                       std::uint64_t n_samples, std::uint64_t seed) {
    if (n_samples == 0) throw ValidationError("intermittent schedule needs N > 0");
    std::vector<OfflineSchedule> out;
    out.reserve(devices);
    for (std::uint64_t d = 0; d < devices; ++d) out.push_back(intermittent_schedule_for(spec, d, n_samples, seed));
    return out;
}

// ---------------------------------------------------------------------------
// Traces and calibration

TraceGenSpec trace_gen_spec(const ScenarioConfig& config, std::size_t template_index, std::uint64_t seed) {
    const auto& t = config.devices.at(template_index);
    TraceGenSpec spec;
    spec.light_accuracy = t.trace.light_accuracy;
    spec.bvsb_correct_shape = t.trace.correct_shape;
    spec.bvsb_incorrect_shape = t.trace.incorrect_shape;
    spec.seed = seed;
    for (const auto& m : config.server.catalog) {
        HeavyModelGen h;
        h.model_id = m.model_id();
        h.accuracy = m.accuracy();
        if (auto it = t.trace.heavy_given_light_wrong.find(m.model_id()); it != t.trace.heavy_given_light_wrong.end()) {
            h.given_light_wrong = it->second;
        }
        spec.heavy.push_back(std::move(h));
    }
    return spec;
}

namespace {

std::vector<std::string> catalog_ids(const ScenarioConfig& config) {
    std::vector<std::string> ids;
    for (const auto& m : config.server.catalog) ids.push_back(m.model_id());
    return ids;
}

/// File-backed traces are split into a calibration prefix and a device pool.
struct FileSplit {
    Trace calibration;
    Trace pool;
};

FileSplit split_file_trace(const ScenarioConfig& config, const DeviceTemplate& t) {
    const auto ids = catalog_ids(config);
    Trace all = load_trace(*t.trace.file, ids);
    FileSplit split;
    split.calibration.model_ids = all.model_ids;
    split.pool.model_ids = all.model_ids;
    const std::size_t calib = static_cast<std::size_t>(config.calibration.samples);
    if (all.size() >= calib + t.n_samples) {
        split.calibration.records.assign(all.records.begin(), all.records.begin() + calib);
        split.pool.records.assign(all.records.begin() + calib, all.records.end());
    } else {
        split.calibration = all;
        split.pool = std::move(all);
    }
    return split;
}

}  // namespace

Trace device_trace(const ScenarioConfig& config, std::size_t template_index, std::uint64_t device_index) {
    const auto& t = config.devices.at(template_index);
    if (!t.trace.file) {
        return generate_trace(trace_gen_spec(config, template_index, child_seed(config.seed, "trace", device_index)),
                              t.n_samples);
    }
    FileSplit split = split_file_trace(config, t);
    if (split.pool.size() < t.n_samples) {
        throw ValidationError("trace file '" + *t.trace.file + "' has " + std::to_string(split.pool.size()) +
                              " records, template '" + t.name + "' needs " + std::to_string(t.n_samples));
    }
    Rng rng = child_rng(config.seed, "trace", device_index);
    std::vector<std::size_t> order(split.pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    Trace out;
    out.model_ids = split.pool.model_ids;
    out.records.reserve(t.n_samples);
    for (std::size_t i = 0; i < t.n_samples; ++i) out.records.push_back(split.pool.records[order[i]]);
    return out;
}

std::vector<ExpandedDevice> expand_devices(const ScenarioConfig& config) {
    std::vector<ExpandedDevice> out;
    for (std::size_t ti = 0; ti < config.devices.size(); ++ti) {
        const auto& t = config.devices[ti];
        for (std::uint64_t k = 0; k < t.count; ++k) {
            ExpandedDevice e;
            e.template_index = ti;
            e.profile.device_id = t.name + "-" + std::to_string(k);
            e.profile.tier = t.tier;
            e.profile.t_inf_ms = t.t_inf_ms;
            e.profile.slo_ms = t.slo_ms;
            e.profile.sr_target = t.sr_target.value_or(config.slo.sr_target_default);
            e.profile.n_samples = t.n_samples;
            e.profile.trace_source = t.trace.file.value_or("generator");
            out.push_back(std::move(e));
        }
    }
    return out;
}

ScenarioCalibration calibrate_scenario(const ScenarioConfig& config) {
    const auto ids = catalog_ids(config);
    ScenarioCalibration cal;
    std::vector<TierCurve> tier_curves;
    for (std::size_t ti = 0; ti < config.devices.size(); ++ti) {
        const auto& t = config.devices[ti];
        Trace trace;
        if (t.trace.file) {
            trace = split_file_trace(config, t).calibration;
        } else {
            auto spec = trace_gen_spec(config, ti, child_seed(config.calibration.seed, "calibration", ti));
            trace = generate_trace(spec, config.calibration.samples);
        }
        auto curve = calibration_curve(trace, ids, config.calibration.grid_step);
        std::vector<double> per_model;
        for (const auto& id : ids) per_model.push_back(calibrate_static_threshold(curve, id));
        cal.static_threshold.push_back(std::move(per_model));
        const bool seen = std::any_of(tier_curves.begin(), tier_curves.end(),
                                      [&](const TierCurve& tc) { return tc.tier == t.tier; });
        if (!seen) tier_curves.push_back({t.tier, t.t_inf_ms, curve});
        cal.curves.push_back(std::move(curve));
    }
    if (config.policy.switch_enabled) {
        cal.switch_limits = calibrate_switch_limits(tier_curves, config.calibration.q_low, config.calibration.q_high);
    }
    return cal;
}

// ---------------------------------------------------------------------------
// Runs

std::string run_output_dir(const std::string& out, const ScenarioConfig& config) {
    namespace fs = std::filesystem;
    return (fs::path(out) / config.name / (std::to_string(config.device_count()) + "devices") /
            ("seed" + std::to_string(config.seed)))
        .string();
}

RunReport run_scenario(const ScenarioConfig& config, const std::optional<std::string>& out_dir,
                       std::ostream* event_log) {
    config.validate();
    const auto calibration = calibrate_scenario(config);
    Simulation sim(config, calibration);
    RunReport report = sim.run(event_log);
    if (out_dir) write_run_outputs(run_output_dir(*out_dir, config), report);
    return report;
}

SweepResult run_sweep(const ScenarioConfig& config, const std::vector<std::uint64_t>& device_counts,
                      const std::vector<std::uint64_t>& seeds, const SweepOptions& options) {
    if (device_counts.empty()) throw ValidationError("sweep needs at least one device count");
    if (seeds.empty()) throw ValidationError("sweep needs at least one seed");
    config.validate();

    struct Cell {
        std::uint64_t devices;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (auto n : device_counts) {
        for (auto s : seeds) cells.push_back({n, s});
    }
    std::vector<SweepRun> runs(cells.size());

    std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mu;
    std::exception_ptr error;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                ScenarioConfig cfg = with_device_count(config, cells[i].devices);
                cfg.seed = cells[i].seed;
                runs[i] = SweepRun{cells[i].devices, cells[i].seed, run_scenario(cfg, options.out_dir)};
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);

    SweepResult result;
    result.report = aggregate_sweep(runs);
    if (options.out_dir) {
        namespace fs = std::filesystem;
        const auto dir = fs::path(*options.out_dir) / config.name;
        fs::create_directories(dir);
        std::ofstream f(dir / "sweep.csv");
        write_sweep_csv(f, result.report);
    }
    if (options.keep_runs) {
        result.runs = std::move(runs);
    }
    return result;
}

}  // namespace edgecasc
