#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include "edgecasc/error.hpp"
#include "edgecasc/sim_engine.hpp"

using namespace edgecasc;

namespace {

SimEvent at(double t, std::uint64_t tag = 0) {
    SimEvent e;
    e.time_ms = t;
    e.kind = EventKind::WindowTick;
    e.sample = tag;
    return e;
}

}  // namespace

TEST(Engine, EmptyQueueReturnsClock) {
    Engine engine;
    EXPECT_EQ(engine.run([](const SimEvent&) {}), 0.0);
}

TEST(Engine, DispatchesInTimeOrder) {
    Engine engine;
    for (double t : {5.0, 3.0, 9.0}) engine.schedule(at(t));
    std::vector<double> seen;
    const double end = engine.run([&](const SimEvent& e) { seen.push_back(e.time_ms); });
    EXPECT_EQ(seen, (std::vector<double>{3.0, 5.0, 9.0}));
    EXPECT_EQ(end, 9.0);
}

TEST(Engine, TiesBreakBySchedulingOrder) {
    Engine engine;
    engine.schedule(at(10, 1));
    engine.schedule(at(10, 2));
    std::vector<std::uint64_t> order;
    engine.run([&](const SimEvent& e) { order.push_back(e.sample); });
    EXPECT_EQ(order, (std::vector<std::uint64_t>{1, 2}));
}

TEST(Engine, EventAtNowRunsAfterEarlierTies) {
    Engine engine;
    engine.schedule(at(1, 1));
    engine.schedule(at(2, 2));
    engine.schedule(at(2, 3));
    std::vector<std::uint64_t> order;
    engine.run([&](const SimEvent& e) {
        order.push_back(e.sample);
        if (e.sample == 1) engine.schedule(at(engine.now(), 4));
        if (e.sample == 2) engine.schedule(at(engine.now(), 5));
    });
    EXPECT_EQ(order, (std::vector<std::uint64_t>{1, 4, 2, 3, 5}));
}

TEST(Engine, SchedulingInThePastIsFatal) {
    Engine engine;
    engine.schedule(at(10));
    EXPECT_THROW(engine.run([&](const SimEvent&) { engine.schedule(at(engine.now() - 1)); }), SimulationError);
}

TEST(Engine, StopsAtRunEnd) {
    Engine engine;
    SimEvent end = at(5);
    end.kind = EventKind::RunEnd;
    engine.schedule(end);
    engine.schedule(at(7));
    std::size_t n = 0;
    engine.run([&](const SimEvent&) { ++n; });
    EXPECT_EQ(n, 1u);
    EXPECT_EQ(engine.pending(), 1u);
}

TEST(Engine, UntilBoundLeavesLaterEvents) {
    Engine engine;
    for (double t : {1.0, 2.0, 30.0}) engine.schedule(at(t));
    engine.run([](const SimEvent&) {}, 10.0);
    EXPECT_EQ(engine.dispatched(), 2u);
    EXPECT_EQ(engine.pending(), 1u);
}

TEST(Engine, EveryScheduledEventDispatchedOnce) {
    Engine engine;
    std::uint64_t fired = 0;
    engine.schedule(at(0));
    engine.run([&](const SimEvent& e) {
        ++fired;
        if (e.time_ms < 100) {
            engine.schedule(at(e.time_ms + 3));
            engine.schedule(at(e.time_ms + 7));
        }
    });
    EXPECT_EQ(fired, engine.scheduled());
    EXPECT_EQ(fired, engine.dispatched());
}

TEST(Engine, ClockIsMonotone) {
    Engine engine;
    for (int i = 0; i < 200; ++i) engine.schedule(at((i * 37) % 101));
    double last = -1.0;
    engine.run([&](const SimEvent& e) {
        EXPECT_GE(e.time_ms, last);
        last = e.time_ms;
    });
}

TEST(Engine, EventLogFormat) {
    Engine engine;
    std::ostringstream log;
    engine.set_event_log(&log);
    SimEvent e = at(1.5);
    e.actor = 3;
    engine.schedule(e);
    SimEvent s = at(2.0);
    s.kind = EventKind::BatchComplete;
    s.actor = kServerActor;
    engine.schedule(s);
    engine.run([](const SimEvent&) {});
    EXPECT_EQ(log.str(), "1.5,0,WindowTick,device3\n2,1,BatchComplete,server\n");
}
