#include "edgecasc/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "edgecasc/error.hpp"

namespace edgecasc {

bool is_allowed_batch(std::uint32_t batch) {
    return std::find(std::begin(kAllowedBatches), std::end(kAllowedBatches), batch) !=
           std::end(kAllowedBatches);
}

void DeviceProfile::validate() const {
    auto fail = [this](const std::string& what) {
        throw ValidationError("device '" + device_id + "': " + what);
    };
    if (!(t_inf_ms > 0.0)) fail("t_inf_ms must be > 0");
    if (!(slo_ms > 0.0)) fail("slo_ms must be > 0");
    if (!(sr_target >= 0.0 && sr_target <= 100.0)) fail("sr_target must lie in [0,100]");
}

ServerModelProfile::ServerModelProfile(std::string model_id, double accuracy,
                                       std::vector<LatencyAnchor> anchors, std::uint32_t max_batch,
                                       double marginal_cost_ms)
    : model_id_(std::move(model_id)),
      accuracy_(accuracy),
      anchors_(std::move(anchors)),
      max_batch_(max_batch) {
    if (anchors_.empty()) {
        throw ValidationError("server model '" + model_id_ + "': at least one latency anchor required");
    }
    marginal_cost_ms_ = marginal_cost_ms >= 0.0 ? marginal_cost_ms : 0.05 * anchors_.front().latency_ms;
    validate();
}

double ServerModelProfile::batch_latency_ms(std::uint32_t batch) const {
    const double b = static_cast<double>(batch);
    if (anchors_.size() == 1) {
        const auto& a = anchors_.front();
        return a.latency_ms + marginal_cost_ms_ * (b - static_cast<double>(a.batch));
    }
    // Find the segment [lo, hi] containing b, or the nearest end segment.
    std::size_t hi = 1;
    while (hi + 1 < anchors_.size() && anchors_[hi].batch < batch) ++hi;
    const auto& lo_a = anchors_[hi - 1];
    const auto& hi_a = anchors_[hi];
    const double slope = (hi_a.latency_ms - lo_a.latency_ms) /
                         static_cast<double>(hi_a.batch - lo_a.batch);
    return lo_a.latency_ms + slope * (b - static_cast<double>(lo_a.batch));
}

void ServerModelProfile::validate() const {
    auto fail = [this](const std::string& what) {
        throw ValidationError("server model '" + model_id_ + "': " + what);
    };
    if (model_id_.empty()) fail("empty model id");
    if (!(accuracy_ >= 0.0 && accuracy_ <= 1.0)) fail("accuracy must lie in [0,1]");
    if (!is_allowed_batch(max_batch_)) fail("max_batch must be one of {1,2,4,8,16,32,64}");
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
        const auto& a = anchors_[i];
        if (!is_allowed_batch(a.batch)) fail("anchor batch " + std::to_string(a.batch) + " not in the allowed set");
        if (!(a.latency_ms > 0.0)) fail("anchor latency must be > 0");
        if (i > 0) {
            if (a.batch <= anchors_[i - 1].batch) fail("anchors must be strictly increasing in batch size");
            if (a.latency_ms < anchors_[i - 1].latency_ms) fail("anchor latency must be non-decreasing");
        }
    }
    if (!(marginal_cost_ms_ >= 0.0)) fail("marginal_cost_ms must be >= 0");
    double prev_tp = 0.0;
    for (auto b : kAllowedBatches) {
        if (b > max_batch_) break;
        const double lat = batch_latency_ms(b);
        if (!(lat > 0.0)) fail("non-positive latency at batch " + std::to_string(b));
        const double tp = static_cast<double>(b) / lat;
        if (tp + 1e-12 < prev_tp) {
            fail("throughput decreases at batch " + std::to_string(b));
        }
        prev_tp = tp;
    }
}

void SLOPolicy::validate() const {
    if (!(window_s > 0.0)) throw ValidationError("slo window_s must be > 0");
    if (!(sr_target_default >= 0.0 && sr_target_default <= 100.0)) {
        throw ValidationError("sr_target_default must lie in [0,100]");
    }
}

const char* to_string(CongestionState state) {
    switch (state) {
        case CongestionState::Underutilized: return "underutilized";
        case CongestionState::Equilibrium: return "equilibrium";
        case CongestionState::Overloaded: return "overloaded";
    }
    return "?";
}

double arrival_rate(std::span<const ForwardingDevice> devices) {
    double rate = 0.0;
    for (std::size_t i = 0; i < devices.size(); ++i) {
        const auto& d = devices[i];
        if (!(d.t_inf_ms > 0.0)) {
            throw ValidationError("device " + std::to_string(i) + ": t_inf_ms must be > 0");
        }
        if (!(d.p_casc >= 0.0 && d.p_casc <= 1.0)) {
            throw ValidationError("device " + std::to_string(i) + ": p_casc must lie in [0,1]");
        }
        rate += d.p_casc / ms_to_s(d.t_inf_ms);
    }
    return rate;
}

double server_throughput(const ServerModelProfile& model, std::uint32_t batch) {
    if (!is_allowed_batch(batch)) {
        throw ValidationError("batch " + std::to_string(batch) + " not in the allowed set");
    }
    if (batch > model.max_batch()) {
        throw ValidationError("batch " + std::to_string(batch) + " exceeds max_batch of " + model.model_id());
    }
    return static_cast<double>(batch) / ms_to_s(model.batch_latency_ms(batch));
}

CongestionState classify_congestion(double arrival, double t_server, double tol) {
    if (!(t_server > 0.0)) throw ValidationError("server throughput must be > 0");
    if (!(arrival >= 0.0)) throw ValidationError("arrival rate must be >= 0");
    if (!(tol >= 0.0)) throw ValidationError("tolerance must be >= 0");
    if (arrival > t_server * (1.0 + tol)) return CongestionState::Overloaded;
    if (arrival < t_server * (1.0 - tol)) return CongestionState::Underutilized;
    return CongestionState::Equilibrium;
}

std::vector<LightModelDefaults> default_light_models() {
    return {
        {"MobileNetV2", kTierLow, 0.7185, 31.0},
        {"EfficientNetLite0", kTierMid, 0.7502, 43.0},
        {"EfficientNetB0", kTierHigh, 0.7704, 33.0},
        {"MobileViT-x-small", TierId{"vit"}, 0.7464, 57.0},
    };
}

std::vector<ServerModelProfile> default_server_models() {
    // Batch-1 latencies are measured values. The second anchors are derived from
    // the saturation throughputs (~1000/s and ~300/s respectively).
    return {
        ServerModelProfile("InceptionV3", 0.7829, {{1, 15.0}, {64, 64.0}}, 64),
        ServerModelProfile("EfficientNetB3", 0.8149, {{1, 25.0}, {16, 53.3}}, 16),
        ServerModelProfile("DeiT-Base-Distilled", 0.8341, {{1, 14.0}}, 64),
    };
}

ServerModelProfile default_server_model(const std::string& model_id) {
    for (auto& m : default_server_models()) {
        if (m.model_id() == model_id) return m;
    }
    throw ValidationError("no default profile for server model '" + model_id + "'");
}

}  // namespace edgecasc
