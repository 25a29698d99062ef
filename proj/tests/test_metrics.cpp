#include <gtest/gtest.h>

#include <sstream>

#include "edgecasc/error.hpp"
#include "edgecasc/metrics.hpp"

using namespace edgecasc;

namespace {

SampleOutcome local(std::uint64_t id, bool slo, bool correct = true) {
    return SampleOutcome{id, Origin::Local, 31.0, slo, correct};
}

}  // namespace

TEST(Metrics, DeviceSloRatio) {
    MetricsCollector m({{"d-0", kTierLow, 100}});
    for (std::uint64_t i = 0; i < 100; ++i) m.record_outcome(0, local(i, i % 20 != 0), true);
    const auto r = m.finalize({});
    EXPECT_DOUBLE_EQ(r.devices[0].slo_satisfaction, 95.0);
    EXPECT_DOUBLE_EQ(r.overall.slo_satisfaction, 95.0);
}

TEST(Metrics, DeviceWithoutOutcomesExcluded) {
    MetricsCollector m({{"d-0", kTierLow, 10}, {"d-1", kTierLow, 10}});
    for (std::uint64_t i = 0; i < 10; ++i) m.record_outcome(0, local(i, true, i < 7), 31.0 * (i + 1));
    const auto r = m.finalize({});
    EXPECT_TRUE(r.devices[1].excluded);
    EXPECT_FALSE(r.devices[0].excluded);
    EXPECT_EQ(r.overall.devices, 1u);
    EXPECT_DOUBLE_EQ(r.overall.accuracy, 0.7);
}

TEST(Metrics, LocalOnlyThroughput) {
    MetricsCollector m({{"d-0", kTierLow, 100}});
    for (std::uint64_t i = 0; i < 100; ++i) m.record_outcome(0, local(i, true), 31.0 * static_cast<double>(i + 1));
    const auto r = m.finalize({});
    EXPECT_NEAR(r.system_throughput, 32.26, 1e-2);
    EXPECT_DOUBLE_EQ(r.makespan_ms, 3100.0);
}

TEST(Metrics, TwoIdenticalDevicesDoubleThroughput) {
    MetricsCollector m({{"d-0", kTierLow, 100}, {"d-1", kTierLow, 100}});
    for (std::uint64_t i = 0; i < 100; ++i) {
        for (std::uint32_t d = 0; d < 2; ++d) m.record_outcome(d, local(i, true, i % 2 == 0), 31.0 * (i + 1));
    }
    const auto r = m.finalize({});
    EXPECT_NEAR(r.system_throughput, 64.5, 0.1);
    EXPECT_DOUBLE_EQ(r.overall.accuracy, 0.5);
}

TEST(Metrics, SampleWeightedAggregatesAndTierPartition) {
    MetricsCollector m({{"a", kTierLow, 10}, {"b", kTierMid, 30}, {"c", kTierMid, 20}});
    for (std::uint64_t i = 0; i < 10; ++i) m.record_outcome(0, local(i, true, true), 1.0);
    for (std::uint64_t i = 0; i < 30; ++i) m.record_outcome(1, local(i, false, false), 1.0);
    for (std::uint64_t i = 0; i < 20; ++i) m.record_outcome(2, local(i, true, i < 10), 1.0);
    const auto r = m.finalize({});
    EXPECT_DOUBLE_EQ(r.overall.accuracy, 20.0 / 60.0);
    EXPECT_DOUBLE_EQ(r.tiers.at("mid").accuracy, 10.0 / 50.0);
    EXPECT_EQ(r.tiers.at("low").devices + r.tiers.at("mid").devices, r.overall.devices);
    EXPECT_EQ(r.tiers.at("low").outcomes + r.tiers.at("mid").outcomes, r.overall.outcomes);
    EXPECT_EQ(r.total_samples, 60u);
}

TEST(Metrics, StuckSamplesAreFatal) {
    MetricsCollector m({{"d-0", kTierLow, 3}});
    m.record_outcome(0, local(0, true), 31.0);
    EXPECT_THROW(m.finalize({{0, {1, 2}}}), SimulationError);
}

TEST(Metrics, RunningWindowSlides) {
    MetricsCollector m({{"d-0", kTierLow, 100}}, 1.0);
    EXPECT_FALSE(m.running_sr(0.0));
    m.record_outcome(0, local(0, false, false), 100.0);
    m.record_outcome(0, local(1, true, true), 600.0);
    EXPECT_DOUBLE_EQ(*m.running_sr(700.0), 50.0);
    EXPECT_DOUBLE_EQ(*m.running_accuracy(700.0), 0.5);
    // (now - 1 s, now] excludes the first outcome once now reaches 1100.
    EXPECT_DOUBLE_EQ(*m.running_sr(1100.0), 100.0);
    EXPECT_FALSE(m.running_sr(1600.0));
}

TEST(Metrics, ReportJsonHasCoreFields) {
    MetricsCollector m({{"d-0", kTierLow, 2}});
    m.record_outcome(0, local(0, true), 31.0);
    m.record_outcome(0, local(1, true), 62.0);
    auto r = m.finalize({});
    r.scenario = "s";
    std::ostringstream out;
    write_report_json(out, r);
    const auto s = out.str();
    for (const char* key : {"\"scenario\"", "\"system_throughput\"", "\"overall\"", "\"tiers\"", "\"devices\""}) {
        EXPECT_NE(s.find(key), std::string::npos) << key;
    }
}

TEST(Metrics, SeriesCsvLeavesEmptyWindowsBlank) {
    std::vector<SeriesPoint> series(2);
    series[0].time_ms = 1500;
    series[0].deployed_model = "InceptionV3";
    series[1].time_ms = 3000;
    series[1].running_sr = 97.5;
    series[1].running_accuracy = 0.75;
    series[1].deployed_model = "InceptionV3";
    std::ostringstream out;
    write_series_csv(out, series);
    EXPECT_EQ(out.str(),
              "time_ms,active_devices,mean_threshold,running_sr,running_accuracy,queue_len,deployed_model,batch_size\n"
              "1500,0,0,,,0,InceptionV3,0\n"
              "3000,0,0,97.5,0.75,0,InceptionV3,0\n");
}

TEST(Sweep, AggregatesMinMeanMax) {
    std::vector<SweepRun> runs;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        RunReport r;
        r.system_throughput = 100.0 * static_cast<double>(seed);
        r.overall.accuracy = 0.7 + 0.01 * static_cast<double>(seed);
        r.tiers["low"].accuracy = 0.5;
        runs.push_back({2, seed, r});
    }
    const auto sweep = aggregate_sweep(runs);
    const auto& t = sweep.at(2, "throughput");
    EXPECT_EQ(t.seed_count, 3u);
    EXPECT_DOUBLE_EQ(t.mean, 200.0);
    EXPECT_DOUBLE_EQ(t.min, 100.0);
    EXPECT_DOUBLE_EQ(t.max, 300.0);
    for (const auto& c : sweep.cells) {
        EXPECT_LE(c.min, c.mean);
        EXPECT_LE(c.mean, c.max);
    }
    EXPECT_NO_THROW(sweep.at(2, "tier.low.accuracy"));
    EXPECT_THROW(sweep.at(3, "throughput"), std::out_of_range);
}

TEST(Sweep, CsvHeader) {
    std::ostringstream out;
    write_sweep_csv(out, SweepReport{});
    EXPECT_EQ(out.str(), "devices,seed_count,metric,mean,min,max\n");
}
