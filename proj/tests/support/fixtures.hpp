#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edgecasc/scenario.hpp"
#include "edgecasc/traces.hpp"

namespace edgecasc::testing {

/// Trace with the given bvsb values; light correct when bvsb >= 0.5, heavy
/// columns all correct.
Trace trace_from_bvsb(const std::vector<double>& bvsb, std::size_t models = 1);

/// Trace of n records with bvsb evenly spread on [0,1).
Trace uniform_trace(std::size_t n, std::size_t models = 1);

/// One low-tier MobileNetV2 template cascading into InceptionV3.
ScenarioConfig single_device_config(std::uint64_t n_samples, double threshold);

/// Homogeneous low-tier scenario against one default server model.
ScenarioConfig homogeneous_config(const std::string& server_model, std::uint64_t devices, double slo_ms,
                                  PolicyKind policy, std::uint64_t n_samples = 5000);

/// Three tiers in equal shares (low/mid/high) against InceptionV3.
ScenarioConfig heterogeneous_config(std::uint64_t devices, PolicyKind policy);

/// Unique scratch directory under the system temp dir.
std::string scratch_dir(const std::string& tag);

}  // namespace edgecasc::testing
