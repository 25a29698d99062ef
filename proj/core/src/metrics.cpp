#include "edgecasc/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "edgecasc/error.hpp"
#include "json.hpp"

namespace edgecasc {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void add(AggregateReport& agg, const DeviceReport& d) {
    ++agg.devices;
    agg.outcomes += d.outcomes;
    agg.forwarded += d.server;
    // Accumulate counts in accuracy/slo temporarily; normalized in finish().
    agg.accuracy += static_cast<double>(d.correct);
    agg.slo_satisfaction += static_cast<double>(d.slo_met);
}

void finish(AggregateReport& agg) {
    if (agg.outcomes == 0) {
        agg.accuracy = 0.0;
        agg.slo_satisfaction = 0.0;
        return;
    }
    const double n = static_cast<double>(agg.outcomes);
    agg.accuracy /= n;
    agg.slo_satisfaction = 100.0 * agg.slo_satisfaction / n;
}

}  // namespace

MetricsCollector::MetricsCollector(std::vector<DeviceInfo> devices, double running_window_s)
    : info_(std::move(devices)), window_ms_(running_window_s * 1000.0) {
    if (!(running_window_s > 0.0)) throw ValidationError("running window must be > 0");
    per_device_.resize(info_.size());
    for (std::size_t i = 0; i < info_.size(); ++i) {
        per_device_[i].device_id = info_[i].device_id;
        per_device_[i].tier = info_[i].tier;
        per_device_[i].n_samples = info_[i].n_samples;
    }
}

void MetricsCollector::record_outcome(std::uint32_t device, const SampleOutcome& outcome, double now_ms) {
    auto& d = per_device_.at(device);
    ++d.outcomes;
    if (outcome.origin == Origin::Local) {
        ++d.local;
    } else {
        ++d.server;
    }
    if (outcome.correct) ++d.correct;
    if (outcome.slo_met) ++d.slo_met;
    ++total_outcomes_;
    last_outcome_ms_ = std::max(last_outcome_ms_, now_ms);

    recent_.push_back({now_ms, outcome.slo_met, outcome.correct});
    if (outcome.slo_met) ++recent_hits_;
    if (outcome.correct) ++recent_correct_;
}

void MetricsCollector::prune(double now_ms) {
    while (!recent_.empty() && recent_.front().time_ms <= now_ms - window_ms_) {
        if (recent_.front().slo_met) --recent_hits_;
        if (recent_.front().correct) --recent_correct_;
        recent_.pop_front();
    }
}

std::optional<double> MetricsCollector::running_sr(double now_ms) {
    prune(now_ms);
    if (recent_.empty()) return std::nullopt;
    return 100.0 * static_cast<double>(recent_hits_) / static_cast<double>(recent_.size());
}

std::optional<double> MetricsCollector::running_accuracy(double now_ms) {
    prune(now_ms);
    if (recent_.empty()) return std::nullopt;
    return static_cast<double>(recent_correct_) / static_cast<double>(recent_.size());
}

void MetricsCollector::record_series(SeriesPoint point) { series_.push_back(std::move(point)); }

void MetricsCollector::record_server(ServerPoint point) { server_series_.push_back(std::move(point)); }

RunReport MetricsCollector::finalize(const std::map<std::uint32_t, std::vector<std::uint64_t>>& outstanding) const {
    std::size_t stuck = 0;
    for (const auto& [dev, ids] : outstanding) stuck += ids.size();
    if (stuck > 0) {
        std::ostringstream msg;
        msg << stuck << " forwarded samples never received a result:";
        std::size_t shown = 0;
        for (const auto& [dev, ids] : outstanding) {
            for (auto id : ids) {
                if (shown++ == 20) break;
                msg << ' ' << info_.at(dev).device_id << '#' << id;
            }
        }
        throw SimulationError(msg.str());
    }

    RunReport report;
    report.devices = per_device_;
    for (auto& d : report.devices) {
        report.total_samples += d.n_samples;
        if (d.outcomes == 0) {
            d.excluded = true;
            std::cerr << "warning: device '" << d.device_id << "' produced no outcomes; excluded from averages\n";
            continue;
        }
        d.accuracy = static_cast<double>(d.correct) / static_cast<double>(d.outcomes);
        d.slo_satisfaction = 100.0 * static_cast<double>(d.slo_met) / static_cast<double>(d.outcomes);
        add(report.overall, d);
        add(report.tiers[d.tier.label], d);
    }
    finish(report.overall);
    for (auto& [tier, agg] : report.tiers) finish(agg);

    report.makespan_ms = last_outcome_ms_;
    report.system_throughput =
        report.makespan_ms > 0.0 ? static_cast<double>(total_outcomes_) / ms_to_s(report.makespan_ms) : 0.0;
    report.series = series_;
    report.server_series = server_series_;
    return report;
}

void write_report_json(std::ostream& out, const RunReport& r) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["scenario"] = r.scenario;
    j["config_digest"] = r.config_digest;
    j["policy"] = r.policy;
    j["seed"] = r.seed;
    j["device_count"] = r.devices.size();
    j["total_samples"] = r.total_samples;
    j["system_throughput"] = r.system_throughput;
    j["makespan_ms"] = r.makespan_ms;
    j["events_dispatched"] = r.events_dispatched;
    auto agg_json = [](const AggregateReport& a) {
        ordered_json o;
        o["devices"] = a.devices;
        o["outcomes"] = a.outcomes;
        o["forwarded"] = a.forwarded;
        o["accuracy"] = a.accuracy;
        o["slo_satisfaction"] = a.slo_satisfaction;
        return o;
    };
    j["overall"] = agg_json(r.overall);
    j["tiers"] = ordered_json::object();
    for (const auto& [tier, agg] : r.tiers) j["tiers"][tier] = agg_json(agg);
    j["static_thresholds"] = ordered_json::object();
    for (const auto& [tier, c] : r.static_thresholds) j["static_thresholds"][tier] = c;
    j["switches"] = ordered_json::array();
    for (const auto& s : r.switches) {
        j["switches"].push_back({{"time_ms", s.time_ms}, {"from", s.from}, {"to", s.to}});
    }
    j["devices"] = ordered_json::array();
    for (const auto& d : r.devices) {
        ordered_json o;
        o["device_id"] = d.device_id;
        o["tier"] = d.tier.label;
        o["n_samples"] = d.n_samples;
        o["outcomes"] = d.outcomes;
        o["local"] = d.local;
        o["server"] = d.server;
        o["accuracy"] = d.accuracy;
        o["slo_satisfaction"] = d.slo_satisfaction;
        o["excluded"] = d.excluded;
        j["devices"].push_back(std::move(o));
    }
    out << j.dump(2) << '\n';
}

void write_series_csv(std::ostream& out, const std::vector<SeriesPoint>& series) {
    out << "time_ms,active_devices,mean_threshold,running_sr,running_accuracy,queue_len,deployed_model,batch_size\n";
    for (const auto& p : series) {
        out << fmt_double(p.time_ms) << ',' << p.active_devices << ',' << fmt_double(p.mean_threshold) << ','
            << (p.running_sr ? fmt_double(*p.running_sr) : "") << ','
            << (p.running_accuracy ? fmt_double(*p.running_accuracy) : "") << ',' << p.queue_len << ','
            << p.deployed_model << ',' << p.batch_size << '\n';
    }
}

void write_server_series_csv(std::ostream& out, const std::vector<ServerPoint>& series) {
    out << "time_ms,queue_len,batch_size,deployed_model\n";
    for (const auto& p : series) {
        out << fmt_double(p.time_ms) << ',' << p.queue_len << ',' << p.batch_size << ',' << p.deployed_model << '\n';
    }
}

void write_updates_csv(std::ostream& out, const std::vector<UpdateRecord>& updates) {
    out << "time_ms,device,sr_update,threshold,multiplier,active_devices\n";
    for (const auto& u : updates) {
        out << fmt_double(u.time_ms) << ',' << u.device << ',' << fmt_double(u.sr_update) << ','
            << fmt_double(u.threshold) << ',' << fmt_double(u.multiplier) << ',' << u.active << '\n';
    }
}

void write_run_outputs(const std::string& dir, const RunReport& report) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(fs::path(dir) / name);
        if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
        return f;
    };
    {
        auto f = open("report.json");
        write_report_json(f, report);
    }
    {
        auto f = open("timeseries.csv");
        write_series_csv(f, report.series);
    }
    {
        auto f = open("server_series.csv");
        write_server_series_csv(f, report.server_series);
    }
    {
        auto f = open("updates.csv");
        write_updates_csv(f, report.updates);
    }
}

const SweepCell& SweepReport::at(std::size_t devices, const std::string& metric) const {
    for (const auto& c : cells) {
        if (c.devices == devices && c.metric == metric) return c;
    }
    throw std::out_of_range("no sweep cell for " + std::to_string(devices) + " devices, metric " + metric);
}

std::map<std::string, double> run_metrics(const RunReport& r) {
    std::map<std::string, double> m;
    m["throughput"] = r.system_throughput;
    m["accuracy"] = r.overall.accuracy;
    m["slo_satisfaction"] = r.overall.slo_satisfaction;
    m["makespan_s"] = ms_to_s(r.makespan_ms);
    m["forward_fraction"] =
        r.overall.outcomes ? static_cast<double>(r.overall.forwarded) / static_cast<double>(r.overall.outcomes) : 0.0;
    m["switches"] = static_cast<double>(r.switches.size());
    for (const auto& [tier, agg] : r.tiers) {
        m["tier." + tier + ".accuracy"] = agg.accuracy;
        m["tier." + tier + ".slo_satisfaction"] = agg.slo_satisfaction;
    }
    return m;
}

SweepReport aggregate_sweep(const std::vector<SweepRun>& runs) {
    SweepReport sweep;
    // devices -> metric -> values, in first-seen order for the axis.
    std::map<std::size_t, std::map<std::string, std::vector<double>>> values;
    for (const auto& run : runs) {
        if (std::find(sweep.axis.begin(), sweep.axis.end(), run.devices) == sweep.axis.end()) {
            sweep.axis.push_back(run.devices);
        }
        for (const auto& [name, v] : run_metrics(run.report)) values[run.devices][name].push_back(v);
    }
    std::sort(sweep.axis.begin(), sweep.axis.end());
    for (auto devices : sweep.axis) {
        for (const auto& [name, vs] : values[devices]) {
            SweepCell cell;
            cell.devices = devices;
            cell.seed_count = vs.size();
            cell.metric = name;
            double sum = 0.0;
            cell.min = std::numeric_limits<double>::infinity();
            cell.max = -std::numeric_limits<double>::infinity();
            for (double v : vs) {
                sum += v;
                cell.min = std::min(cell.min, v);
                cell.max = std::max(cell.max, v);
            }
            cell.mean = sum / static_cast<double>(vs.size());
            // Guard against rounding pushing the mean just outside [min, max].
            cell.mean = std::clamp(cell.mean, cell.min, cell.max);
            sweep.cells.push_back(std::move(cell));
        }
    }
    return sweep;
}

void write_sweep_csv(std::ostream& out, const SweepReport& sweep) {
    out << "devices,seed_count,metric,mean,min,max\n";
    for (const auto& c : sweep.cells) {
        out << c.devices << ',' << c.seed_count << ',' << c.metric << ',' << fmt_double(c.mean) << ','
            << fmt_double(c.min) << ',' << fmt_double(c.max) << '\n';
    }
}

}  // namespace edgecasc
