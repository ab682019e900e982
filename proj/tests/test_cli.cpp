#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "camtraj/cli.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using camtraj::test::source_path;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("camtraj_cli_") + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunResult run(const std::string& args) {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + CAMTRAJ_CLI_PATH + "\" " + args + " >\"" +
                            out.string() + "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  std::string scene(const std::string& name) {
    return "\"" + source_path("scenes/" + name) + "\"";
  }

  std::string out_dir(const std::string& sub) { return "\"" + (dir_ / sub).string() + "\""; }

  fs::path dir_;
};

TEST_F(CliTest, PlanWritesTrajectoryAndReport) {
  const RunResult r = run("plan " + scene("straight_line.json") + " --out-dir " + out_dir("a"));
  ASSERT_EQ(r.code, camtraj::kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "a" / "trajectory.csv"));
  ASSERT_TRUE(fs::exists(dir_ / "a" / "report.json"));
  const auto report = nlohmann::json::parse(slurp(dir_ / "a" / "report.json"));
  EXPECT_TRUE(report.is_object());
  EXPECT_NE(r.out.find("trajectory.csv"), std::string::npos);
}

TEST_F(CliTest, EveryShippedScenePlans) {
  for (const auto& entry : fs::directory_iterator(source_path("scenes"))) {
    if (entry.path().extension() != ".json") continue;
    const RunResult r = run("plan \"" + entry.path().string() + "\" --out-dir " +
                            out_dir(entry.path().stem().string()));
    EXPECT_EQ(r.code, camtraj::kExitOk) << entry.path() << ": " << r.err;
  }
}

TEST_F(CliTest, RepeatedPlansAreByteIdentical) {
  ASSERT_EQ(run("plan " + scene("orbit_uneven.json") + " --out-dir " + out_dir("a")).code, 0);
  ASSERT_EQ(run("plan " + scene("orbit_uneven.json") + " --out-dir " + out_dir("b")).code, 0);
  const std::string a = slurp(dir_ / "a" / "trajectory.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir_ / "b" / "trajectory.csv"));
}

TEST_F(CliTest, InvalidSceneExitsOneWithFieldPath) {
  const RunResult r = run("plan \"" + source_path("tests/data/bad_initial_pitch.json") +
                          "\" --out-dir " + out_dir("a"));
  EXPECT_EQ(r.code, camtraj::kExitValidation);
  EXPECT_NE(r.err.find("initial_state.gimbal_pitch"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "a" / "trajectory.csv"));
}

TEST_F(CliTest, DecreasingTimesExitOne) {
  const RunResult r = run("plan \"" + source_path("tests/data/decreasing_times.json") + "\"");
  EXPECT_EQ(r.code, camtraj::kExitValidation);
  EXPECT_NE(r.err.find("keyframes[2].time"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingSceneFileExitsOne) {
  const RunResult r = run("plan \"" + (dir_ / "nope.json").string() + "\"");
  EXPECT_EQ(r.code, camtraj::kExitValidation);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, BadArgumentsExitOne) {
  EXPECT_EQ(run("").code, camtraj::kExitValidation);
  EXPECT_EQ(run("bogus").code, camtraj::kExitValidation);
  EXPECT_EQ(run("plan").code, camtraj::kExitValidation);
  EXPECT_EQ(run("plan " + scene("minimal.json") + " --dt abc").code, camtraj::kExitValidation);
  const RunResult w = run("plan " + scene("minimal.json") + " --weights nosuch=1");
  EXPECT_EQ(w.code, camtraj::kExitValidation);
  EXPECT_NE(w.err.find("nosuch"), std::string::npos);
  EXPECT_EQ(run("time-opt " + scene("minimal.json") + " --mode sideways").code,
            camtraj::kExitValidation);
}

TEST_F(CliTest, HelpExitsZero) {
  const RunResult r = run("--help");
  EXPECT_EQ(r.code, camtraj::kExitOk);
  EXPECT_NE(r.out.find("plan"), std::string::npos);
  EXPECT_EQ(run("time-opt --help").code, camtraj::kExitOk);
}

TEST_F(CliTest, SolverFailureExitsTwo) {
  const RunResult r = run("plan " + scene("straight_line.json") + " --qp-max-iter 2 --out-dir " +
                          out_dir("a"));
  EXPECT_EQ(r.code, camtraj::kExitSolver);
  EXPECT_NE(r.err.find("max_iter"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "a" / "trajectory.csv"));
}

TEST_F(CliTest, DtOverrideChangesStageCount) {
  ASSERT_EQ(run("plan " + scene("straight_line.json") + " --dt 0.05 --out-dir " + out_dir("a"))
                .code,
            0);
  std::ifstream csv(dir_ / "a" / "trajectory.csv");
  std::string line;
  int rows = -1;  // header
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 101);  // 5 s at 0.05 s plus the initial stage
}

TEST_F(CliTest, MetricsAndCompare) {
  ASSERT_EQ(run("plan " + scene("straight_line.json") + " --out-dir " + out_dir("a")).code, 0);
  const std::string traj = "\"" + (dir_ / "a" / "trajectory.csv").string() + "\"";

  const RunResult m = run("metrics " + traj + " --json --scene " + scene("straight_line.json"));
  ASSERT_EQ(m.code, 0) << m.err;
  const auto metrics = nlohmann::json::parse(m.out);
  EXPECT_TRUE(metrics.contains("normalized_jerk"));
  EXPECT_GE(metrics["normalized_jerk"].get<double>(), 0.0);

  const RunResult c = run("compare " + traj + " " + traj + " --scene " +
                          scene("straight_line.json") + " --out-dir " + out_dir("c"));
  ASSERT_EQ(c.code, 0) << c.err;
  const auto cmp = nlohmann::json::parse(slurp(dir_ / "c" / "comparison.json"));
  EXPECT_DOUBLE_EQ(cmp["delta"]["normalized_jerk"].get<double>(), 0.0);

  const RunResult bad = run("metrics \"" + (dir_ / "missing.csv").string() + "\"");
  EXPECT_EQ(bad.code, camtraj::kExitValidation);
}

TEST_F(CliTest, BaselineLookatReportsExcursion) {
  const RunResult r =
      run("baseline-lookat " + scene("lookat_tilt.json") + " --out-dir " + out_dir("a"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "a" / "lookat_baseline.csv"));
  EXPECT_NE(r.out.find("pitch excursion"), std::string::npos);

  const RunResult none = run("baseline-lookat " + scene("straight_line.json"));
  EXPECT_EQ(none.code, camtraj::kExitValidation);
  EXPECT_NE(none.err.find("lookat_keyframes"), std::string::npos);
}

TEST_F(CliTest, TimeOptReducesJerkOnUnequalSpacing) {
  const RunResult r =
      run("time-opt " + scene("unequal_spacing.json") + " --out-dir " + out_dir("a"));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* name : {"fixed_timing.csv", "optimized.csv", "optimized_scene.json",
                           "time_opt_trace.json", "comparison.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "a" / name)) << name;
  }
  const auto cmp = nlohmann::json::parse(slurp(dir_ / "a" / "comparison.json"));
  const double before = cmp["fixed_timing"]["normalized_jerk"].get<double>();
  const double after = cmp["time_optimized"]["normalized_jerk"].get<double>();
  EXPECT_LT(after, before);

  const auto trace = nlohmann::json::parse(slurp(dir_ / "a" / "time_opt_trace.json"));
  const auto& it = trace["iterations"];
  for (std::size_t k = 1; k < it.size(); ++k) {
    EXPECT_LT(it[k]["score"].get<double>(), it[k - 1]["score"].get<double>());
  }

  // The optimized scene is itself a valid scene.
  const RunResult again = run("plan \"" + (dir_ / "a" / "optimized_scene.json").string() +
                              "\" --out-dir " + out_dir("b"));
  EXPECT_EQ(again.code, 0) << again.err;
}

}  // namespace
