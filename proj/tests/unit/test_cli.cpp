#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "mpfmfd/evaluation.hpp"
#include "mpfmfd/pipeline.hpp"
#include "mpfmfd/simulator.hpp"

namespace fs = std::filesystem;
using namespace mpfmfd;

namespace {

const char* kSmallConfig =
    "sim.length = 3000\n"
    "split.train = 0:1500\n"
    "split.calibrate = 1500:2300\n"
    "split.test = 2300:3000\n"
    "tcn.input_window_n = 8\n"
    "tcn.channels = 4\n"
    "tcn.num_blocks = 2\n"
    "tcn.epochs = 1\n"
    "alarm.window_w = 20\n"
    "fault.start = 2500\n";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mpfmfd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_text_file(dir_ / "small.cfg", kSmallConfig);
    config_ = parse_config(kSmallConfig);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with stdout and stderr captured into files; returns the exit code.
  int run(const std::string& args) {
    const std::string cmd = std::string("\"") + MPFMFD_CLI_PATH + "\" " + args + " > \"" + p("stdout") +
                            "\" 2> \"" + p("stderr") + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }
  std::string file(const std::string& name) const { return read_text_file(dir_ / name); }
  std::string small() const { return "--config \"" + p("small.cfg") + "\""; }

  fs::path dir_;
  RunConfig config_;
};

}  // namespace

TEST_F(Cli, SimulateIsDeterministicAndMatchesLibrary) {
  ASSERT_EQ(run("simulate --config " MPFMFD_REF_CFG " --out \"" + p("a.csv") + "\""), 0);
  ASSERT_EQ(run("simulate --config " MPFMFD_REF_CFG " --out \"" + p("b.csv") + "\""), 0);
  EXPECT_EQ(file("a.csv"), file("b.csv"));
  EXPECT_EQ(file("a.csv"), format_csv(generate(load_config(MPFMFD_REF_CFG).sim_config())));
}

TEST_F(Cli, SeedFlagOverridesConfig) {
  ASSERT_EQ(run("simulate " + small() + " --seed 7 --out \"" + p("s7.csv") + "\""), 0);
  ASSERT_EQ(run("simulate " + small() + " --set seed=9 --seed 7 --out \"" + p("s7b.csv") + "\""), 0);
  ASSERT_EQ(run("simulate " + small() + " --out \"" + p("s1.csv") + "\""), 0);
  RunConfig seven = config_;
  seven.set("seed", "7");
  EXPECT_EQ(file("s7.csv"), format_csv(generate(seven.sim_config())));
  EXPECT_EQ(file("s7b.csv"), file("s7.csv"));
  EXPECT_NE(file("s1.csv"), file("s7.csv"));
}

TEST_F(Cli, PipelineStagesMatchLibrary) {
  const SeriesPair clean = generate(config_.sim_config());
  ASSERT_EQ(run("simulate " + small() + " --out \"" + p("data.csv") + "\""), 0);
  ASSERT_EQ(file("data.csv"), format_csv(clean));

  ASSERT_EQ(run("inject --in \"" + p("data.csv") + "\" --out \"" + p("faulted.csv") +
                "\" --fault bias --param offset=3 --param start=2500"),
            0);
  const SeriesPair faulted = inject(clean, make_fault_spec("bias", {{"offset", "3"}, {"start", "2500"}})).faulted;
  EXPECT_EQ(file("faulted.csv"), format_csv(faulted));

  std::vector<TrainedModel> models;
  for (const std::string name : {"naive", "hardsub", "tcn-exo"}) {
    ASSERT_EQ(run("train " + small() + " --in \"" + p("data.csv") + "\" --model " + name + " --out \"" +
                  p(name + ".json") + "\""),
              0)
        << file("stderr");
    models.push_back(train_forecaster(clean, config_, name));
    EXPECT_EQ(file(name + ".json"), format_model(models.back())) << name;
  }

  ASSERT_EQ(run("calibrate " + small() + " --in \"" + p("data.csv") + "\" --model \"" + p("tcn-exo.json") +
                "\" --out \"" + p("thr.json") + "\""),
            0);
  const Thresholds thr = calibrate_model(models[2], clean, config_);
  EXPECT_EQ(file("thr.json"), format_thresholds(thr));

  // Calibration range of the clean data: no alarm, exit 0.
  const std::string detect_args = "detect --model \"" + p("tcn-exo.json") + "\" --thresholds \"" + p("thr.json") + "\"";
  ASSERT_EQ(run(detect_args + " --in \"" + p("data.csv") + "\" --range 1500:2300 --out \"" + p("cal.csv") + "\""), 0);
  EXPECT_EQ(file("stdout"), "0 alarms\n");

  // Faulted test range: alarms, exit 3, same events as the library.
  ASSERT_EQ(run(detect_args + " --in \"" + p("faulted.csv") + "\" --range 2300:3000 --out \"" + p("al.csv") + "\""),
            3);
  const Detection d = detect_range(models[2], faulted, thr, {2300, 3000});
  EXPECT_FALSE(d.events.empty());
  EXPECT_EQ(file("al.csv"), format_alarms_csv(d.events, thr));
  EXPECT_EQ(file("stdout"), std::to_string(d.events.size()) + " alarms\n");

  ASSERT_EQ(run("compare " + small() + " --in \"" + p("data.csv") + "\" --models \"" + p("naive.json") + "\" \"" +
                p("hardsub.json") + "\" \"" + p("tcn-exo.json") + "\" --out \"" + p("cmp.csv") + "\""),
            0);
  const std::vector<NamedModel> named = {{"naive", &models[0]}, {"hardsub", &models[1]}, {"tcn-exo", &models[2]}};
  EXPECT_EQ(file("cmp.csv"), format_comparison_csv(compare_models(clean, named, config_.split.test)));
}

TEST_F(Cli, ReceptiveFieldAndChannelWarnings) {
  ASSERT_EQ(run("simulate " + small() + " --out \"" + p("data.csv") + "\""), 0);
  ASSERT_EQ(run("train " + small() + " --set tcn.input_window_n=3 --in \"" + p("data.csv") +
                "\" --model tcn-endo --out \"" + p("m.json") + "\""),
            0);
  EXPECT_NE(file("stderr").find("receptive field"), std::string::npos);
  ASSERT_EQ(run("inject --in \"" + p("data.csv") + "\" --out \"" + p("f.csv") +
                "\" --fault drift --param channel=C --param start=100"),
            0);
  EXPECT_NE(file("stderr").find("channel C"), std::string::npos);
  const int code = run("e2e " + small() + " --fault bias --param channel=C --out-dir \"" + p("run") + "\"");
  EXPECT_TRUE(code == 0 || code == 3) << code;
  EXPECT_NE(file("stderr").find("channel C"), std::string::npos);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("simulate"), 2);
  EXPECT_EQ(run("simulate --set nonsense --out \"" + p("x.csv") + "\""), 2);
  EXPECT_EQ(run("detect --in a --model b --thresholds c --range 5"), 2);
  EXPECT_EQ(run("simulate --set sim.length=abc --out \"" + p("x.csv") + "\""), 1);
  EXPECT_NE(file("stderr").find("InvalidConfig"), std::string::npos);
  EXPECT_EQ(run("train --in \"" + p("missing.csv") + "\" --model naive --out \"" + p("m.json") + "\""), 1);
  EXPECT_EQ(run("inject --in \"" + p("missing.csv") + "\" --out x --fault melt"), 1);
  EXPECT_EQ(run("--version"), 0);
}

TEST_F(Cli, EndToEndBiasFiresWithFiniteLatency) {
  ASSERT_EQ(run("e2e " + small() + " --fault bias --param offset=3 --out-dir \"" + p("run") + "\""), 3)
      << file("stderr");
  EXPECT_EQ(file("stdout"), "alarm fired\n");
  const std::string det = file("run/detection.csv");
  const auto line = det.substr(det.find('\n') + 1);
  // fault_start,first_alarm,latency,...: the latency cell is a non-empty integer.
  const auto first = line.find(',');
  const auto second = line.find(',', first + 1);
  const auto third = line.find(',', second + 1);
  const std::string latency = line.substr(second + 1, third - second - 1);
  ASSERT_FALSE(latency.empty());
  EXPECT_LE(std::stoll(latency), 40);

  ASSERT_EQ(run("e2e " + small() + " --out-dir \"" + p("clean") + "\""), 0);
  EXPECT_EQ(file("stdout"), "no alarm\n");
  EXPECT_FALSE(fs::exists(dir_ / "clean" / "detection.csv"));
}
