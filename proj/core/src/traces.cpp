#include "edgecasc/traces.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "edgecasc/error.hpp"
#include "edgecasc/rng.hpp"

namespace edgecasc {

void SwitchLimits::validate() const {
    if (!(c_lower >= 0.0 && c_lower <= 1.0)) throw ValidationError("c_lower must lie in [0,1]");
    for (const auto& [tier, upper] : c_upper) {
        if (!(upper >= 0.0 && upper <= 1.0)) {
            throw ValidationError("c_upper for tier '" + tier.label + "' must lie in [0,1]");
        }
        if (c_lower > upper) {
            throw ValidationError("c_lower exceeds c_upper of tier '" + tier.label + "'");
        }
    }
}

std::optional<std::size_t> Trace::model_index(const std::string& model_id) const {
    auto it = std::find(model_ids.begin(), model_ids.end(), model_id);
    if (it == model_ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - model_ids.begin());
}

double TraceGenSpec::given_light_wrong(std::size_t i) const {
    const auto& h = heavy.at(i);
    if (h.given_light_wrong) return *h.given_light_wrong;
    if (light_accuracy >= 1.0) return 0.0;
    return std::clamp((h.accuracy - light_accuracy) / (1.0 - light_accuracy), 0.0, 1.0);
}

double TraceGenSpec::given_light_correct(std::size_t i) const {
    const auto& h = heavy.at(i);
    if (light_accuracy <= 0.0) return 0.0;
    return (h.accuracy - (1.0 - light_accuracy) * given_light_wrong(i)) / light_accuracy;
}

void TraceGenSpec::validate() const {
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(light_accuracy)) throw ValidationError("light_accuracy must lie in [0,1]");
    for (auto [a, b] : {bvsb_correct_shape, bvsb_incorrect_shape}) {
        if (!(a > 0.0 && b > 0.0)) throw ValidationError("confidence shape parameters must be > 0");
    }
    for (std::size_t i = 0; i < heavy.size(); ++i) {
        const auto& h = heavy[i];
        if (!in_unit(h.accuracy)) {
            throw ValidationError("heavy accuracy of '" + h.model_id + "' must lie in [0,1]");
        }
        const double wrong = given_light_wrong(i);
        const double right = given_light_correct(i);
        constexpr double eps = 1e-12;
        if (!(wrong >= -eps && wrong <= 1.0 + eps) || !(right >= -eps && right <= 1.0 + eps)) {
            std::ostringstream msg;
            msg << "inconsistent conditionals for '" << h.model_id << "': P(correct|light wrong)=" << wrong
                << ", implied P(correct|light correct)=" << right;
            throw ValidationError(msg.str());
        }
    }
}

double compute_bvsb(std::span<const double> softmax) {
    if (softmax.size() < 2) throw ValidationError("softmax needs at least two classes");
    double sum = 0.0;
    double p1 = -1.0;
    double p2 = -1.0;
    for (double p : softmax) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("softmax entries must lie in [0,1]");
        sum += p;
        if (p > p1) {
            p2 = p1;
            p1 = p;
        } else if (p > p2) {
            p2 = p;
        }
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("softmax vector is not normalized");
    return p1 - p2;
}

Trace generate_trace(const TraceGenSpec& spec, std::size_t n) {
    spec.validate();
    Trace trace;
    for (const auto& h : spec.heavy) trace.model_ids.push_back(h.model_id);

    std::vector<double> p_wrong(spec.heavy.size());
    std::vector<double> p_right(spec.heavy.size());
    for (std::size_t m = 0; m < spec.heavy.size(); ++m) {
        p_wrong[m] = std::clamp(spec.given_light_wrong(m), 0.0, 1.0);
        p_right[m] = std::clamp(spec.given_light_correct(m), 0.0, 1.0);
    }

    Rng rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double below_one = std::nextafter(1.0, 0.0);
    trace.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        TraceRecord r;
        r.sample_id = i;
        r.light_correct = unit(rng) < spec.light_accuracy;
        const auto& shape = r.light_correct ? spec.bvsb_correct_shape : spec.bvsb_incorrect_shape;
        // A margin of exactly 1 is never forwarded; keep it strictly inside.
        r.bvsb = std::min(sample_beta(rng, shape.first, shape.second), below_one);
        r.heavy_correct.resize(spec.heavy.size());
        for (std::size_t m = 0; m < spec.heavy.size(); ++m) {
            const double p = r.light_correct ? p_right[m] : p_wrong[m];
            r.heavy_correct[m] = unit(rng) < p ? 1 : 0;
        }
        trace.records.push_back(std::move(r));
    }
    return trace;
}

void write_trace(std::ostream& out, const Trace& trace) {
    out << "sample_id,bvsb,light_correct";
    for (const auto& id : trace.model_ids) out << ",heavy_" << id;
    out << '\n';
    char buf[32];
    for (const auto& r : trace.records) {
        // Shortest round-trip representation.
        auto res = std::to_chars(buf, buf + sizeof buf, r.bvsb);
        out << r.sample_id << ',' << std::string_view(buf, res.ptr - buf) << ','
            << (r.light_correct ? 1 : 0);
        for (auto h : r.heavy_correct) out << ',' << (h ? 1 : 0);
        out << '\n';
    }
}

void write_trace(const std::string& path, const Trace& trace) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    write_trace(out, trace);
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        fields.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_bool(std::string_view s, std::size_t line, std::string_view column) {
    s = trim(s);
    if (s == "1") return true;
    if (s == "0") return false;
    throw ParseError("column '" + std::string(column) + "' expects 0 or 1, got '" + std::string(s) + "'", line);
}

}  // namespace

Trace load_trace(std::istream& in, std::span<const std::string> models) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty trace file: missing header", 1);
    ++line_no;
    auto header = split_csv(line);
    for (auto& h : header) h = trim(h);
    auto column_of = [&](std::string_view name) -> std::optional<std::size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    auto require = [&](std::string_view name, const std::string& what) {
        auto c = column_of(name);
        if (!c) throw ParseError("missing column '" + std::string(name) + "'" + what, 1);
        return *c;
    };
    const std::size_t c_id = require("sample_id", "");
    const std::size_t c_bvsb = require("bvsb", "");
    const std::size_t c_light = require("light_correct", "");
    std::vector<std::size_t> c_heavy;
    for (const auto& m : models) {
        c_heavy.push_back(require("heavy_" + m, " for server model '" + m + "'"));
    }

    Trace trace;
    trace.model_ids.assign(models.begin(), models.end());
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        TraceRecord r;
        auto id = trim(fields[c_id]);
        auto [p, ec] = std::from_chars(id.data(), id.data() + id.size(), r.sample_id);
        if (ec != std::errc() || p != id.data() + id.size()) {
            throw ParseError("malformed sample_id '" + std::string(id) + "'", line_no);
        }
        auto bv = trim(fields[c_bvsb]);
        auto [pb, eb] = std::from_chars(bv.data(), bv.data() + bv.size(), r.bvsb);
        if (eb != std::errc() || pb != bv.data() + bv.size()) {
            throw ParseError("malformed bvsb '" + std::string(bv) + "'", line_no);
        }
        if (!(r.bvsb >= 0.0 && r.bvsb <= 1.0)) {
            throw ParseError("bvsb " + std::string(bv) + " outside [0,1]", line_no);
        }
        r.light_correct = parse_bool(fields[c_light], line_no, "light_correct");
        r.heavy_correct.reserve(c_heavy.size());
        for (std::size_t m = 0; m < c_heavy.size(); ++m) {
            r.heavy_correct.push_back(parse_bool(fields[c_heavy[m]], line_no, header[c_heavy[m]]) ? 1 : 0);
        }
        trace.records.push_back(std::move(r));
    }
    return trace;
}

Trace load_trace(const std::string& path, std::span<const std::string> models) {
    std::ifstream in(path);
    if (!in) throw ValidationError("trace file '" + path + "' not found or unreadable");
    try {
        return load_trace(in, models);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::size_t CalibrationCurve::model_column(const std::string& model_id) const {
    auto it = std::find(model_ids.begin(), model_ids.end(), model_id);
    if (it == model_ids.end()) throw ValidationError("calibration curve has no model '" + model_id + "'");
    return static_cast<std::size_t>(it - model_ids.begin());
}

std::vector<double> threshold_grid(double grid_step) {
    if (!(grid_step > 0.0 && grid_step <= 1.0)) throw ValidationError("grid_step must lie in (0,1]");
    std::vector<double> grid;
    const double steps = 1.0 / grid_step;
    const auto whole = static_cast<std::size_t>(std::llround(steps));
    if (std::abs(steps - static_cast<double>(whole)) < 1e-9) {
        for (std::size_t i = 0; i <= whole; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(whole));
    } else {
        for (std::size_t i = 0; static_cast<double>(i) * grid_step < 1.0; ++i) {
            grid.push_back(static_cast<double>(i) * grid_step);
        }
        grid.push_back(1.0);
    }
    return grid;
}

CalibrationCurve calibration_curve(const Trace& trace, std::span<const std::string> models, double grid_step) {
    if (trace.empty()) throw ValidationError("calibration needs a non-empty trace");
    CalibrationCurve curve;
    curve.thresholds = threshold_grid(grid_step);
    curve.model_ids.assign(models.begin(), models.end());

    std::vector<std::size_t> cols;
    for (const auto& m : models) {
        auto c = trace.model_index(m);
        if (!c) throw ValidationError("trace has no column for server model '" + m + "'");
        cols.push_back(*c);
    }

    // Sort by confidence; a threshold c forwards the prefix with bvsb < c.
    std::vector<const TraceRecord*> sorted;
    sorted.reserve(trace.size());
    for (const auto& r : trace.records) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const TraceRecord* a, const TraceRecord* b) { return a->bvsb < b->bvsb; });

    const std::size_t n = sorted.size();
    const std::size_t n_models = cols.size();
    // prefix_light[k] = light-correct among the first k sorted records; same for heavy.
    std::vector<std::size_t> prefix_light(n + 1, 0);
    std::vector<std::vector<std::size_t>> prefix_heavy(n_models, std::vector<std::size_t>(n + 1, 0));
    for (std::size_t k = 0; k < n; ++k) {
        prefix_light[k + 1] = prefix_light[k] + (sorted[k]->light_correct ? 1 : 0);
        for (std::size_t m = 0; m < n_models; ++m) {
            prefix_heavy[m][k + 1] = prefix_heavy[m][k] + (sorted[k]->heavy_correct[cols[m]] ? 1 : 0);
        }
    }
    const double dn = static_cast<double>(n);
    curve.light_accuracy = static_cast<double>(prefix_light[n]) / dn;
    for (std::size_t m = 0; m < n_models; ++m) {
        curve.heavy_accuracy.push_back(static_cast<double>(prefix_heavy[m][n]) / dn);
    }

    curve.expected_accuracy.assign(n_models, {});
    std::size_t k = 0;
    for (double c : curve.thresholds) {
        while (k < n && sorted[k]->bvsb < c) ++k;
        curve.forward_fraction.push_back(static_cast<double>(k) / dn);
        for (std::size_t m = 0; m < n_models; ++m) {
            const std::size_t correct = (prefix_light[n] - prefix_light[k]) + prefix_heavy[m][k];
            curve.expected_accuracy[m].push_back(static_cast<double>(correct) / dn);
        }
    }
    return curve;
}

void write_calibration(std::ostream& out, const CalibrationCurve& curve) {
    out << "threshold,forward_fraction";
    for (const auto& m : curve.model_ids) out << ",accuracy_" << m;
    out << '\n';
    out << std::setprecision(10);
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        out << curve.thresholds[i] << ',' << curve.forward_fraction[i];
        for (const auto& acc : curve.expected_accuracy) out << ',' << acc[i];
        out << '\n';
    }
}

double calibrate_static_threshold(const CalibrationCurve& curve, const std::string& model_id) {
    constexpr double kTargetForward = 0.30;
    constexpr double kMaxLoss = 0.01;
    const auto& acc = curve.expected_accuracy.at(curve.model_column(model_id));
    const auto& grid = curve.thresholds;

    std::size_t c30 = grid.size() - 1;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (curve.forward_fraction[i] >= kTargetForward) {
            c30 = i;
            break;
        }
    }
    const double best = *std::max_element(acc.begin(), acc.end());
    if (best - acc[c30] > kMaxLoss) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (acc[i] >= best - kMaxLoss) return grid[i];
        }
    }
    return grid[c30];
}

namespace {

double first_reaching(const CalibrationCurve& curve, double fraction) {
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        if (curve.forward_fraction[i] >= fraction) return curve.thresholds[i];
    }
    return curve.thresholds.back();
}

}  // namespace

SwitchLimits calibrate_switch_limits(std::span<const TierCurve> curves, double q_low, double q_high) {
    if (!(q_low > 0.0 && q_low < q_high && q_high < 1.0)) {
        throw ValidationError("switch limit quantiles need 0 < q_low < q_high < 1");
    }
    if (curves.empty()) throw ValidationError("switch limit calibration needs at least one tier");
    const auto fastest = std::min_element(curves.begin(), curves.end(),
                                          [](const TierCurve& a, const TierCurve& b) { return a.t_inf_ms < b.t_inf_ms; });
    SwitchLimits limits;
    limits.c_lower = first_reaching(fastest->curve, q_low);
    for (const auto& tc : curves) {
        const double upper = first_reaching(tc.curve, q_high);
        if (limits.c_lower > upper) {
            throw CalibrationError("switch limits cross for tier '" + tc.tier.label +
                                   "' (c_lower above c_upper); widen q_low/q_high");
        }
        limits.c_upper[tc.tier] = upper;
    }
    return limits;
}

}  // namespace edgecasc
