#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "edgecasc/traces.hpp"

namespace edgecasc::testing {

struct OracleSample {
    std::uint64_t sample_id = 0;
    bool forwarded = false;
    double finish_ms = 0.0;
    double latency_ms = 0.0;
    bool slo_met = false;
    bool correct = false;
};

struct OracleResult {
    std::vector<OracleSample> samples;  // by sample id
    std::uint64_t local = 0;
    std::uint64_t server = 0;
    std::uint64_t correct = 0;
    std::uint64_t slo_met = 0;
    double makespan_ms = 0.0;
    double throughput = 0.0;
};

struct OracleServer {
    std::vector<std::pair<std::uint32_t, double>> anchors;  // (batch, latency_ms), two or more
    std::uint32_t max_batch = 64;
    std::size_t column = 0;
};

/// Closed-form walk of one device with a fixed threshold and no network delay:
/// sample i starts at i*t_inf, forwarded samples queue FIFO at a batching server.
OracleResult single_device_oracle(const std::vector<TraceRecord>& trace, double t_inf_ms, double threshold,
                                  double slo_ms, const OracleServer& server);

}  // namespace edgecasc::testing
