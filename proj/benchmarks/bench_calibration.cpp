#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "edgecasc/traces.hpp"

using namespace edgecasc;

namespace {

TraceGenSpec spec() {
    TraceGenSpec s;
    s.heavy = {{"InceptionV3", 0.7829, std::nullopt}, {"EfficientNetB3", 0.8149, std::nullopt}};
    s.seed = 7;
    return s;
}

}  // namespace

static void BM_GenerateTrace(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(generate_trace(spec(), n));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateTrace)->Arg(10000)->Arg(100000);

static void BM_CalibrationCurve(benchmark::State& state) {
    const Trace trace = generate_trace(spec(), static_cast<std::size_t>(state.range(0)));
    const std::vector<std::string> models{"InceptionV3", "EfficientNetB3"};
    for (auto _ : state) benchmark::DoNotOptimize(calibration_curve(trace, models));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CalibrationCurve)->Arg(10000)->Arg(100000);
