#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ovd/cli.hpp"
#include "ovd/error.hpp"

namespace ovd {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ovd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// A fresh directory per test.
fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = fs::temp_directory_path() /
             (std::string("ovd_") + info->test_suite_name() + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Config, DefaultsRoundTripThroughText) {
  RunConfig cfg;
  cfg.train.lr = 0.125;
  cfg.eval.thetas = {0, 3, 9};
  std::stringstream ss;
  write_config(ss, cfg);
  RunConfig back;
  apply_config(back, ss, "mem");
  std::stringstream again;
  write_config(again, back);
  std::stringstream first;
  write_config(first, cfg);
  EXPECT_EQ(again.str(), first.str());
}

TEST(Config, EveryKeyReadable) {
  const RunConfig cfg;
  for (const auto& key : config_keys()) EXPECT_NO_THROW(get_config_value(cfg, key)) << key;
}

TEST(Config, UnknownKeyNamesLine) {
  RunConfig cfg;
  std::stringstream ss("# comment\n\ntrain.lr = 0.1\ntrain.bogus = 3\n");
  try {
    apply_config(cfg, ss, "run.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:4"), std::string::npos) << e.what();
  }
}

TEST(Config, MissingEqualsIsParseError) {
  RunConfig cfg;
  std::stringstream ss("train.lr 0.1\n");
  EXPECT_THROW(apply_config(cfg, ss, "run.cfg"), ParseError);
}

TEST(Config, BadValuesRejected) {
  RunConfig cfg;
  EXPECT_THROW(set_config_value(cfg, "train.steps", "ten"), ConfigError);
  EXPECT_THROW(set_config_value(cfg, "train.lr", "nan"), ConfigError);
  EXPECT_THROW(set_config_value(cfg, "train.kl_enabled", "maybe"), ConfigError);
  EXPECT_THROW(set_config_value(cfg, "rejection.test_mode", "fuzzy"), ConfigError);
}

TEST(Config, ValidateChecksEvalThetas) {
  RunConfig cfg;
  cfg.eval.thetas = {11};
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(run_cli({}).code, kExitUsage); }

TEST(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run_cli({"train", "--no-such-flag"}).code, kExitUsage);
}

TEST(Cli, HelpSucceeds) { EXPECT_EQ(run_cli({"--help"}).code, kExitOk); }

TEST(Cli, MissingConfigNamesPath) {
  const auto r = run_cli({"train", "--config", "/nonexistent/run.cfg"});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("/nonexistent/run.cfg"), std::string::npos) << r.err;
}

TEST(Cli, InvalidOverrideIsConfigError) {
  EXPECT_EQ(run_cli({"train", "--set", "train.group_size=1", "--print-config"}).code, kExitConfig);
}

TEST(Cli, PrintConfigShowsOverride) {
  const auto r = run_cli({"train", "--set", "train.lr=0.25", "--print-config"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("train.lr = 0.25"), std::string::npos);
}

TEST(Cli, MemoryTable1) {
  const auto r = run_cli({"memory", "table1"});
  EXPECT_EQ(r.code, kExitOk);
  for (const char* bytes : {"4980736000", "2490368000", "16777216", "469762048"}) {
    EXPECT_NE(r.out.find(bytes), std::string::npos) << bytes;
  }
}

TEST(Cli, MemoryReduction) {
  const auto r = run_cli({"memory", "reduction", "--set", "memory.N=32"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find(",486400\n"), std::string::npos) << r.out;
}

TEST(Cli, MemorySweepRows) {
  const auto r = run_cli({"memory", "sweep", "--axis", "L", "--units", "gib"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("32768,18.5547,9.2773,1.7500,27.8320"), std::string::npos) << r.out;
}

TEST(Cli, TheoryGranularityPasses) {
  const auto r = run_cli({"theory", "granularity", "--samples", "100000"});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  EXPECT_EQ(r.out.rfind("check,case,value,reference,tolerance,status\n", 0), 0u);
}

TEST(Cli, TrainWritesArtifactsAndIsReproducible) {
  const auto dir = scratch_dir();
  const auto a = dir / "a", b = dir / "b";
  for (const auto& d : {a, b}) {
    const auto r = run_cli({"train", "--steps", "30", "--set", "teacher.score_temp=2",
                            "--out", d.string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  for (const char* f : {"metrics.csv", "policy.ckpt", "manifest.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const auto metrics = slurp(a / "metrics.csv");
  EXPECT_EQ(metrics.rfind("step,mean_reward,alpha,clip_fraction,mean_advantage,loss,kl\n", 0), 0u);
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 31);
}

TEST(Cli, UnwritableOutputIsIoError) {
  const auto dir = scratch_dir();
  const auto blocker = dir / "file";
  std::ofstream(blocker) << "x";
  const auto r = run_cli({"train", "--steps", "1", "--out", (blocker / "sub").string()});
  EXPECT_EQ(r.code, kExitIo) << r.err;
}

TEST(Cli, EvalMissingCheckpointIsIoError) {
  const auto dir = scratch_dir();
  const auto r = run_cli({"eval", "--checkpoint", (dir / "none.ckpt").string(), "--out",
                          dir.string()});
  EXPECT_EQ(r.code, kExitIo);
}

TEST(Cli, GenTasksRoundTrip) {
  const auto dir = scratch_dir();
  const auto path = dir / "problems.json";
  const auto r = run_cli({"gen-tasks", "--kind", "qa", "--pool-size", "4", "--out", path.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto suite = load_problem_set(path.string());
  EXPECT_EQ(suite.problems.size(), 4u);
  EXPECT_EQ(suite.env.kind(), TaskKind::qa);
  std::ostringstream again;
  write_problem_set(again, suite);
  EXPECT_EQ(again.str(), slurp(path));
}

TEST(Cli, EvalUsesProblemFile) {
  const auto dir = scratch_dir();
  const auto problems = dir / "p.json";
  ASSERT_EQ(run_cli({"gen-tasks", "--pool-size", "3", "--out", problems.string()}).code, kExitOk);
  ASSERT_EQ(run_cli({"train", "--steps", "5", "--out", dir.string()}).code, kExitOk);
  const auto r = run_cli({"eval", "--checkpoint", (dir / "policy.ckpt").string(), "--problems",
                          problems.string(), "--thetas", "0,10", "--modes", "det,sampled",
                          "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
  EXPECT_TRUE(fs::exists(dir / "eval_outcomes.csv"));
}

TEST(ProblemSet, MalformedJsonIsConfigError) {
  std::stringstream ss("{\"schema\": \"ovd-problems/1\", ");
  EXPECT_THROW(read_problem_set(ss, "bad.json"), ConfigError);
}

class EvalGrid : public ::testing::Test {
 protected:
  TaskSuite suite = [] {
    SuiteConfig sc;
    sc.pool_size = 40;
    sc.pool_seed = 500;
    return build_suite(sc);
  }();
  TeacherConfig teacher = [] {
    TeacherConfig t;
    t.score_temp = 1.0;
    return t;
  }();
};

TEST_F(EvalGrid, InterventionAtBoundaryThresholds) {
  const auto table = eval_grid(make_policy(10, 2), suite, teacher, {}, {0, 10},
                               {TestMode::deterministic, TestMode::sampled}, 0, 16);
  for (const auto& row : table.rows) {
    EXPECT_EQ(row.intervention_fraction, row.theta == 0 ? 0.0 : 1.0);
    if (row.theta == 10) EXPECT_EQ(row.mean_reward, 1.0);
  }
}

TEST_F(EvalGrid, OracleTeacherRewardNonDecreasingInTheta) {
  std::vector<int> thetas;
  for (int t = 0; t <= 10; ++t) thetas.push_back(t);
  // a partially trained student so that rewards are neither all 0 nor all 1
  auto policy = make_policy(10, 2);
  TrainConfig cfg;
  cfg.steps = 300;
  cfg.rejection.reject_on_incorrect = false;
  cfg.teacher.score_temp = 2.0;
  policy = train(cfg, suite, policy, {});
  for (auto mode : {TestMode::deterministic, TestMode::sampled}) {
    const auto table = eval_grid(policy, suite, teacher, {}, thetas, {mode}, 3, 16);
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
      EXPECT_GE(table.rows[i].mean_reward, table.rows[i - 1].mean_reward)
          << "theta " << table.rows[i].theta;
      EXPECT_GE(table.rows[i].intervention_fraction, table.rows[i - 1].intervention_fraction);
    }
  }
}

}  // namespace
}  // namespace ovd
