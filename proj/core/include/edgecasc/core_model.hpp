#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace edgecasc {

/// Batch sizes the server may dispatch.
inline constexpr std::uint32_t kAllowedBatches[] = {1, 2, 4, 8, 16, 32, 64};

bool is_allowed_batch(std::uint32_t batch);

struct TierId {
    std::string label;

    friend auto operator<=>(const TierId&, const TierId&) = default;
};

inline const TierId kTierLow{"low"};
inline const TierId kTierMid{"mid"};
inline const TierId kTierHigh{"high"};

struct DeviceProfile {
    std::string device_id;
    TierId tier;
    double t_inf_ms = 0.0;
    double slo_ms = 0.0;
    double sr_target = 95.0;  // percentage points
    std::uint64_t n_samples = 0;
    std::string trace_source;

    void validate() const;
};

struct LatencyAnchor {
    std::uint32_t batch = 1;
    double latency_ms = 0.0;

    friend bool operator==(const LatencyAnchor&, const LatencyAnchor&) = default;
};

/// A server-hosted model: accuracy plus a piecewise-linear batch latency curve.
///
/// Between anchors the latency is interpolated linearly in batch size; past the
/// last anchor the last segment's slope is extended. A single anchor L1 is
/// extended with `marginal_cost_ms` per extra sample (default 0.05 * L1).
class ServerModelProfile {
  public:
    ServerModelProfile() = default;
    ServerModelProfile(std::string model_id, double accuracy, std::vector<LatencyAnchor> anchors,
                       std::uint32_t max_batch, double marginal_cost_ms = -1.0);

    const std::string& model_id() const { return model_id_; }
    double accuracy() const { return accuracy_; }
    const std::vector<LatencyAnchor>& anchors() const { return anchors_; }
    std::uint32_t max_batch() const { return max_batch_; }
    double marginal_cost_ms() const { return marginal_cost_ms_; }

    /// Latency of one batch, milliseconds. Defined for any batch >= 1.
    double batch_latency_ms(std::uint32_t batch) const;

  private:
    void validate() const;

    std::string model_id_;
    double accuracy_ = 0.0;
    std::vector<LatencyAnchor> anchors_;
    std::uint32_t max_batch_ = 64;
    double marginal_cost_ms_ = 0.0;
};

struct SLOPolicy {
    double window_s = 1.5;
    double sr_target_default = 95.0;

    void validate() const;
};

enum class CongestionState { Underutilized, Equilibrium, Overloaded };

const char* to_string(CongestionState state);

struct ForwardingDevice {
    double p_casc = 0.0;
    double t_inf_ms = 0.0;
};

/// Aggregate request rate into the server, requests/second.
double arrival_rate(std::span<const ForwardingDevice> devices);

/// Samples/second the model sustains at a fixed batch size.
double server_throughput(const ServerModelProfile& model, std::uint32_t batch);

CongestionState classify_congestion(double arrival, double t_server, double tol);

inline double ms_to_s(double ms) { return ms / 1000.0; }

/// Device-side light models and their measured latency/accuracy.
struct LightModelDefaults {
    std::string model_id;
    TierId tier;
    double accuracy;
    double t_inf_ms;
};

std::vector<LightModelDefaults> default_light_models();

/// InceptionV3, EfficientNetB3 and DeiT-Base-Distilled server profiles.
std::vector<ServerModelProfile> default_server_models();

/// Looks a default server profile up by id; throws ValidationError if unknown.
ServerModelProfile default_server_model(const std::string& model_id);

}  // namespace edgecasc
