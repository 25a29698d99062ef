#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "edgecasc/error.hpp"
#include "edgecasc/scheduler.hpp"

using namespace edgecasc;

namespace {

SwitchLimits limits3() {
    SwitchLimits l;
    l.c_lower = 0.05;
    l.c_upper = {{kTierLow, 0.60}, {kTierMid, 0.55}, {kTierHigh, 0.65}};
    return l;
}

ThresholdState st(std::uint32_t device, TierId tier, double c) {
    ThresholdState s;
    s.device = device;
    s.tier = std::move(tier);
    s.threshold = c;
    return s;
}

PolicyConfig pp() {
    PolicyConfig c;
    c.kind = PolicyKind::MultiTascPP;
    return c;
}

}  // namespace

TEST(ContinuousUpdate, Examples) {
    EXPECT_DOUBLE_EQ(continuous_update(95, 80, 0.005, 0.5), 0.425);
    EXPECT_EQ(continuous_update(95, 95, 0.005, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(continuous_update(95, 100, 0.005, 0.5), 0.525);
}

TEST(ContinuousUpdate, Unclamped) {
    EXPECT_GT(continuous_update(95, 100, 0.005, 0.99), 1.0);
    EXPECT_LT(continuous_update(95, 0, 0.005, 0.1), 0.0);
}

TEST(ApplyMultiplier, FirstStepScalesMultiplier) {
    const auto r = apply_multiplier(95, 100, 0.525, 1.0, 10);
    ASSERT_TRUE(r);
    EXPECT_DOUBLE_EQ(r->threshold, 0.525);
    EXPECT_DOUBLE_EQ(r->multiplier, 1.01);
}

TEST(ApplyMultiplier, Compounds) {
    const auto r = apply_multiplier(95, 100, 0.525, 1.01, 10);
    ASSERT_TRUE(r);
    EXPECT_DOUBLE_EQ(r->threshold, 0.53025);
    EXPECT_DOUBLE_EQ(r->multiplier, 1.0201);
}

TEST(ApplyMultiplier, ResetsBelowTarget) {
    const auto r = apply_multiplier(95, 80, 0.425, 1.05, 10);
    ASSERT_TRUE(r);
    EXPECT_DOUBLE_EQ(r->threshold, 0.425);
    EXPECT_EQ(r->multiplier, 1.0);
}

TEST(ApplyMultiplier, EqualityTakesResetBranch) {
    const auto r = apply_multiplier(95, 95, 0.5, 1.3, 4);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->threshold, 0.5);
    EXPECT_EQ(r->multiplier, 1.0);
}

TEST(ApplyMultiplier, NoActiveDevicesSkips) {
    EXPECT_FALSE(apply_multiplier(95, 100, 0.5, 1.0, 0));
}

TEST(ApplyMultiplier, ClampsToUnitInterval) {
    const auto r = apply_multiplier(95, 100, 0.9, 1.5, 2);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->threshold, 1.0);
    EXPECT_GE(r->multiplier, 1.0);
}

TEST(HandleSrUpdate, ComposesUpdateAndMultiplier) {
    Scheduler s(pp(), 1.5, 0.0);
    s.register_device(0, kTierLow, 95.0, 0.5);
    const auto d = s.handle_sr_update(0, 80.0, 1500.0);
    ASSERT_TRUE(d);
    EXPECT_DOUBLE_EQ(d->threshold, 0.425);
    EXPECT_EQ(d->device, 0u);
    EXPECT_EQ(d->deliver_at_ms, 1500.0);
}

TEST(HandleSrUpdate, ClampsAtOne) {
    Scheduler s(pp(), 1.5, 2.0);
    s.register_device(0, kTierLow, 95.0, 1.0);
    for (int i = 0; i < 40; ++i) s.handle_sr_update(0, 100.0, 1500.0 * i);
    EXPECT_GT(s.state(0).multiplier, 1.5);
    const auto d = s.handle_sr_update(0, 100.0, 60000.0);
    ASSERT_TRUE(d);
    EXPECT_EQ(d->threshold, 1.0);
    EXPECT_EQ(d->deliver_at_ms, 60002.0);
}

TEST(HandleSrUpdate, AlternatingStreamResetsMultiplier) {
    Scheduler s(pp(), 1.5, 0.0);
    s.register_device(0, kTierLow, 95.0, 0.3);
    for (int i = 0; i < 10; ++i) {
        s.handle_sr_update(0, 100.0, 1500.0 * (2 * i));
        EXPECT_GT(s.state(0).multiplier, 1.0);
        s.handle_sr_update(0, 80.0, 1500.0 * (2 * i + 1));
        EXPECT_EQ(s.state(0).multiplier, 1.0);
    }
}

TEST(HandleSrUpdate, FixedPointAtTarget) {
    Scheduler s(pp(), 1.5, 0.0);
    s.register_device(0, kTierLow, 95.0, 0.37);
    const auto d = s.handle_sr_update(0, 95.0, 1500.0);
    ASSERT_TRUE(d);
    EXPECT_EQ(d->threshold, 0.37);
}

TEST(HandleSrUpdate, MonotoneInSrUpdate) {
    for (double c : {0.0, 0.2, 0.5, 0.9, 1.0}) {
        double prev = -1.0;
        for (double sr = 0.0; sr <= 100.0; sr += 0.5) {
            Scheduler s(pp(), 1.5, 0.0);
            for (std::uint32_t d = 0; d < 5; ++d) s.register_device(d, kTierLow, 95.0, c);
            const double out = s.handle_sr_update(0, sr, 1500.0)->threshold;
            EXPECT_GE(out, prev) << "c=" << c << " sr=" << sr;
            prev = out;
        }
    }
}

TEST(HandleSrUpdate, ClampAndMultiplierInvariantUnderRandomStreams) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> sr(0.0, 100.0);
    Scheduler s(pp(), 1.5, 0.0);
    for (std::uint32_t d = 0; d < 8; ++d) s.register_device(d, kTierLow, 95.0, 0.5);
    for (int i = 0; i < 5000; ++i) {
        const auto d = s.handle_sr_update(static_cast<std::uint32_t>(i % 8), sr(rng) > 30 ? 100.0 : sr(rng), i * 10.0);
        ASSERT_TRUE(d);
        EXPECT_GE(d->threshold, 0.0);
        EXPECT_LE(d->threshold, 1.0);
    }
    for (const auto& st : s.states()) EXPECT_GE(st.multiplier, 1.0);
}

TEST(HandleSrUpdate, StaticPolicyNeverChangesThresholds) {
    PolicyConfig cfg;
    cfg.kind = PolicyKind::Static;
    Scheduler s(cfg, 1.5, 0.0);
    s.register_device(0, kTierLow, 95.0, 0.3);
    EXPECT_FALSE(s.handle_sr_update(0, 20.0, 1500.0));
    EXPECT_EQ(s.state(0).threshold, 0.3);
}

TEST(SwitchDecision, AllBelowInOneTierWinsRegardlessOfOthers) {
    const std::vector<ThresholdState> states{st(0, kTierLow, 0.02), st(1, kTierLow, 0.03), st(2, kTierMid, 0.9),
                                             st(3, kTierMid, 0.9),  st(4, kTierHigh, 0.9), st(5, kTierHigh, 0.9)};
    EXPECT_EQ(switch_decision(states, limits3()), -1);
}

TEST(SwitchDecision, AllAboveGivesPlusOne) {
    const std::vector<ThresholdState> states{st(0, kTierLow, 0.7),  st(1, kTierLow, 0.61), st(2, kTierMid, 0.56),
                                             st(3, kTierMid, 0.9),  st(4, kTierHigh, 0.66), st(5, kTierHigh, 1.0)};
    EXPECT_EQ(switch_decision(states, limits3()), 1);
}

TEST(SwitchDecision, MixedGivesZero) {
    const std::vector<ThresholdState> states{st(0, kTierLow, 0.5),  st(1, kTierLow, 0.02), st(2, kTierMid, 0.9),
                                             st(3, kTierMid, 0.01), st(4, kTierHigh, 0.3), st(5, kTierHigh, 0.9)};
    EXPECT_EQ(switch_decision(states, limits3()), 0);
}

TEST(SwitchDecision, TruthTableOverTierStates) {
    // Each tier either sits entirely below c_lower or entirely above its c_upper.
    const TierId tiers[] = {kTierLow, kTierMid, kTierHigh};
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<ThresholdState> states;
        bool any_below = false;
        for (int t = 0; t < 3; ++t) {
            const bool below = (mask >> t) & 1;
            any_below = any_below || below;
            const double c = below ? 0.01 : 0.95;
            states.push_back(st(2 * t, tiers[t], c));
            states.push_back(st(2 * t + 1, tiers[t], c));
        }
        EXPECT_EQ(switch_decision(states, limits3()), any_below ? -1 : 1) << "mask " << mask;
    }
}

TEST(SwitchDecision, PermutationInvariant) {
    std::vector<ThresholdState> states{st(0, kTierLow, 0.7),  st(1, kTierLow, 0.02), st(2, kTierMid, 0.56),
                                       st(3, kTierMid, 0.01), st(4, kTierHigh, 0.66), st(5, kTierHigh, 0.3)};
    std::mt19937 rng(1);
    const int base = switch_decision(states, limits3());
    for (int i = 0; i < 20; ++i) {
        std::shuffle(states.begin(), states.end(), rng);
        EXPECT_EQ(switch_decision(states, limits3()), base);
    }
}

TEST(SwitchDecision, InactiveDevicesIgnored) {
    auto a = st(0, kTierLow, 0.01);
    auto b = st(1, kTierLow, 0.5);
    b.active = false;
    const std::vector<ThresholdState> states{a, b};
    SwitchLimits l;
    l.c_lower = 0.05;
    l.c_upper = {{kTierLow, 0.6}};
    EXPECT_EQ(switch_decision(states, l), -1);
}

TEST(SwitchTarget, Directions) {
    const std::vector<ServerModelProfile> catalog{default_server_model("InceptionV3"),
                                                  default_server_model("EfficientNetB3")};
    EXPECT_EQ(switch_target(catalog, 1, -1), std::optional<std::size_t>(0));
    EXPECT_EQ(switch_target(catalog, 0, 1), std::optional<std::size_t>(1));
    EXPECT_EQ(switch_target(catalog, 0, 0), std::nullopt);
    EXPECT_EQ(switch_target(catalog, 0, -1), std::nullopt);
    EXPECT_EQ(switch_target(catalog, 1, 1), std::nullopt);
}

TEST(StepUpdate, Examples) {
    EXPECT_DOUBLE_EQ(multitasc_step_delta({64, 64, 64}, 32, 0.05), -0.05);
    EXPECT_DOUBLE_EQ(multitasc_step_delta({8, 8}, 32, 0.05), 0.05);
    EXPECT_EQ(multitasc_step_delta({}, 32, 0.05), 0.0);

    PolicyConfig cfg;
    cfg.kind = PolicyKind::MultiTascStep;
    Scheduler s(cfg, 1.5, 0.0);
    for (std::uint32_t d = 0; d < 3; ++d) s.register_device(d, kTierLow, 95.0, 0.5);
    const auto out = s.step_update({64, 64}, 32, 1500.0);
    ASSERT_EQ(out.size(), 3u);
    for (const auto& d : out) EXPECT_DOUBLE_EQ(d.threshold, 0.45);
    s.step_update({8}, 32, 3000.0);
    for (const auto& st : s.states()) EXPECT_DOUBLE_EQ(st.threshold, 0.5);
    EXPECT_TRUE(s.step_update({}, 32, 4500.0).empty());
}

TEST(MarkInactive, GracePeriodThenDrop) {
    Scheduler s(pp(), 1.5, 0.0);
    s.register_device(0, kTierLow, 95.0, 0.5);
    s.register_device(1, kTierLow, 95.0, 0.5);
    s.handle_sr_update(0, 95.0, 0.0);
    s.handle_sr_update(1, 95.0, 0.0);
    // Device 1 keeps reporting, device 0 falls silent after t = 0.
    s.handle_sr_update(1, 95.0, 1500.0);
    EXPECT_EQ(s.mark_inactive(1500.0), 2u);  // one silent window
    s.handle_sr_update(1, 95.0, 3000.0);
    s.handle_sr_update(1, 95.0, 4500.0);
    EXPECT_EQ(s.mark_inactive(4500.0), 1u);  // two windows missed
    EXPECT_FALSE(s.state(0).active);
    // Coming back reactivates.
    s.handle_sr_update(0, 95.0, 6000.0);
    EXPECT_EQ(s.active_count(), 2u);
}

TEST(MarkInactive, AllSilentMeansNoActiveDevices) {
    Scheduler s(pp(), 1.5, 0.0);
    s.register_device(0, kTierLow, 95.0, 0.5);
    EXPECT_EQ(s.mark_inactive(10000.0), 0u);
    EXPECT_FALSE(s.mean_active_threshold());
    EXPECT_EQ(s.check_switch(), 0);
}

TEST(Scheduler, SwitchingWithoutLimitsRejected) {
    PolicyConfig cfg = pp();
    cfg.switch_enabled = true;
    EXPECT_THROW(Scheduler(cfg, 1.5, 0.0), ValidationError);
}

TEST(Scheduler, PolicyNames) {
    EXPECT_EQ(parse_policy_kind("static"), PolicyKind::Static);
    EXPECT_EQ(parse_policy_kind("multitasc"), PolicyKind::MultiTascStep);
    EXPECT_EQ(parse_policy_kind("multitascpp"), PolicyKind::MultiTascPP);
    EXPECT_THROW(parse_policy_kind("greedy"), ValidationError);
    EXPECT_STREQ(to_string(PolicyKind::MultiTascPP), "multitascpp");
}
