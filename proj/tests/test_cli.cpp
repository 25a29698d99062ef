#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

int cli(const std::string& args) {
    const std::string cmd = std::string(EDGECASC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const char* name) { return (fs::path(EDGECASC_CONFIG_DIR) / name).string(); }

}  // namespace

TEST(Cli, RunWritesOutputsUnderScenarioCountSeed) {
    const auto out = edgecasc::testing::scratch_dir("cli_run");
    const auto log = (fs::path(out) / "events.csv").string();
    ASSERT_EQ(cli("run --config " + config("homogeneous_inception.yaml") +
                  " --devices 3 --seed 5 --policy static --slo-ms 150 --out " + out + " --event-log " + log),
              0);
    const auto dir = fs::path(out) / "homogeneous_inception" / "3devices" / "seed5";
    for (const char* f : {"report.json", "timeseries.csv", "server_series.csv", "updates.csv"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    EXPECT_GT(fs::file_size(log), 0u);
}

TEST(Cli, MissingConfigIsValidationError) {
    EXPECT_EQ(cli("run --config /no/such/file.yaml"), 1);
}

TEST(Cli, BadPolicyIsValidationError) {
    EXPECT_EQ(cli("run --config " + config("homogeneous_inception.yaml") + " --policy greedy"), 1);
}

TEST(Cli, InvalidConfigValueIsValidationError) {
    const auto dir = edgecasc::testing::scratch_dir("cli_bad");
    const auto path = (fs::path(dir) / "bad.yaml").string();
    std::ofstream(path) << "schema_version: 1\nname: bad\ndevices:\n  - name: low\n    t_inf_ms: -4\n"
                           "server:\n  deployed: InceptionV3\n  models: [InceptionV3]\n";
    EXPECT_EQ(cli("run --config " + path + " --out " + dir), 1);
}

TEST(Cli, SweepWritesTable) {
    const auto out = edgecasc::testing::scratch_dir("cli_sweep");
    ASSERT_EQ(cli("sweep --config " + config("homogeneous_inception.yaml") + " --devices 1,2 --seeds 1,2 --out " + out),
              0);
    EXPECT_TRUE(fs::exists(fs::path(out) / "homogeneous_inception" / "sweep.csv"));
}

TEST(Cli, GenTracesCalibrateAndSchedule) {
    const auto out = edgecasc::testing::scratch_dir("cli_misc");
    ASSERT_EQ(cli("gen-traces --config " + config("heterogeneous.yaml") + " --samples 500 --out " + out), 0);
    EXPECT_TRUE(fs::exists(fs::path(out) / "heterogeneous" / "traces" / "mid.csv"));
    ASSERT_EQ(cli("calibrate --config " + config("model_switching.yaml") + " --out " + out), 0);
    EXPECT_TRUE(fs::exists(fs::path(out) / "model_switching" / "calibration" / "thresholds.json"));
    ASSERT_EQ(cli("schedule-intermittent --config " + config("intermittent.yaml") + " --out " + out), 0);
    EXPECT_TRUE(fs::exists(fs::path(out) / "intermittent" / "intermittent_schedule.csv"));
}

TEST(Cli, NoSubcommandIsValidationError) {
    EXPECT_EQ(cli(""), 1);
}
