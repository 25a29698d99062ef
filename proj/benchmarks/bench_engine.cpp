#include <benchmark/benchmark.h>

#include "edgecasc/sim_engine.hpp"

using namespace edgecasc;

// Self-rescheduling chain of `width` independent tickers, like a fleet of devices.
static void BM_EngineTickers(benchmark::State& state) {
    const auto width = static_cast<std::uint32_t>(state.range(0));
    constexpr int kTicks = 200;
    for (auto _ : state) {
        Engine engine;
        for (std::uint32_t a = 0; a < width; ++a) {
            SimEvent ev;
            ev.time_ms = 31.0 + a * 0.001;
            ev.kind = EventKind::InferenceComplete;
            ev.actor = a;
            ev.sample = 0;
            engine.schedule(ev);
        }
        engine.run([&](const SimEvent& ev) {
            if (ev.sample + 1 < kTicks) {
                SimEvent next = ev;
                next.time_ms = engine.now() + 31.0;
                ++next.sample;
                engine.schedule(next);
            }
        });
        benchmark::DoNotOptimize(engine.dispatched());
    }
    state.SetItemsProcessed(state.iterations() * width * kTicks);
}
BENCHMARK(BM_EngineTickers)->Arg(10)->Arg(100)->Arg(1000);
