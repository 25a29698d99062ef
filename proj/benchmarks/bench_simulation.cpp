#include <benchmark/benchmark.h>

#include "edgecasc/scenario.hpp"
#include "edgecasc/simulation.hpp"

using namespace edgecasc;

namespace {

ScenarioConfig fleet(std::uint64_t devices, PolicyKind policy) {
    ScenarioConfig c;
    c.name = "bench";
    DeviceTemplate t;
    t.name = "low";
    t.tier = kTierLow;
    t.count = devices;
    t.n_samples = 2000;
    c.devices.push_back(t);
    c.server.catalog = {default_server_model("InceptionV3")};
    c.server.deployed = "InceptionV3";
    c.policy.kind = policy;
    return c;
}

void run_fleet(benchmark::State& state, PolicyKind policy) {
    const auto c = fleet(static_cast<std::uint64_t>(state.range(0)), policy);
    const auto cal = calibrate_scenario(c);
    std::uint64_t events = 0;
    for (auto _ : state) {
        Simulation sim(c, cal);
        const auto report = sim.run();
        events += report.events_dispatched;
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 2000);
    state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}

}  // namespace

static void BM_RunStatic(benchmark::State& state) { run_fleet(state, PolicyKind::Static); }
static void BM_RunMultiTascPP(benchmark::State& state) { run_fleet(state, PolicyKind::MultiTascPP); }

BENCHMARK(BM_RunStatic)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunMultiTascPP)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
