#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edgecasc/core_model.hpp"
#include "edgecasc/switch_limits.hpp"

namespace edgecasc {

struct TraceRecord {
    std::uint64_t sample_id = 0;
    double bvsb = 0.0;
    bool light_correct = false;
    /// Indexed like Trace::model_ids.
    std::vector<std::uint8_t> heavy_correct;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Per-sample light-model confidence and correctness for every server model.
struct Trace {
    std::vector<std::string> model_ids;
    std::vector<TraceRecord> records;

    /// Column index of `model_id`, or nullopt.
    std::optional<std::size_t> model_index(const std::string& model_id) const;

    bool empty() const { return records.empty(); }
    std::size_t size() const { return records.size(); }

    friend bool operator==(const Trace&, const Trace&) = default;
};

struct HeavyModelGen {
    std::string model_id;
    double accuracy = 0.0;
    /// P(heavy correct | light wrong). Unset means the nested default: the heavy
    /// model is correct on every sample the light model gets right.
    std::optional<double> given_light_wrong;
};

struct TraceGenSpec {
    double light_accuracy = 0.7185;
    std::vector<HeavyModelGen> heavy;
    std::pair<double, double> bvsb_correct_shape{8.0, 2.0};
    std::pair<double, double> bvsb_incorrect_shape{2.0, 5.0};
    std::uint64_t seed = 0;

    /// Resolved P(heavy correct | light wrong) for heavy[i].
    double given_light_wrong(std::size_t i) const;
    /// Implied P(heavy correct | light correct) for heavy[i].
    double given_light_correct(std::size_t i) const;

    void validate() const;
};

/// Best-versus-second-best margin of a softmax vector.
double compute_bvsb(std::span<const double> softmax);

Trace generate_trace(const TraceGenSpec& spec, std::size_t n);

/// Trace file: header `sample_id,bvsb,light_correct,heavy_<model>...`, booleans 0/1.
void write_trace(std::ostream& out, const Trace& trace);
void write_trace(const std::string& path, const Trace& trace);

/// Parses a trace; only the `models` columns are retained, in the given order.
Trace load_trace(std::istream& in, std::span<const std::string> models);
Trace load_trace(const std::string& path, std::span<const std::string> models);

struct CalibrationCurve {
    std::vector<double> thresholds;
    std::vector<double> forward_fraction;
    std::vector<std::string> model_ids;
    /// expected_accuracy[m][i]: cascade accuracy with model m at thresholds[i].
    std::vector<std::vector<double>> expected_accuracy;
    double light_accuracy = 0.0;
    std::vector<double> heavy_accuracy;

    std::size_t model_column(const std::string& model_id) const;
};

inline constexpr double kDefaultGridStep = 0.001;

/// Threshold grid 0, step, 2*step, ..., 1 (1 always included).
std::vector<double> threshold_grid(double grid_step);

CalibrationCurve calibration_curve(const Trace& trace, std::span<const std::string> models,
                                   double grid_step = kDefaultGridStep);

void write_calibration(std::ostream& out, const CalibrationCurve& curve);

/// Forward ~30% of samples unless that costs more than 1 pp of accuracy against
/// the best point on the curve, in which case take the lowest threshold within 1 pp.
double calibrate_static_threshold(const CalibrationCurve& curve, const std::string& model_id);

struct TierCurve {
    TierId tier;
    double t_inf_ms = 0.0;
    CalibrationCurve curve;
};

SwitchLimits calibrate_switch_limits(std::span<const TierCurve> curves, double q_low = 0.05,
                                     double q_high = 0.60);

}  // namespace edgecasc
