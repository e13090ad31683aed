#include <gtest/gtest.h>

#include <sstream>

#include "arfdx/cli/cli.hpp"
#include "arfdx/cli/config.hpp"
#include "arfdx/io.hpp"
#include "test_support.hpp"

using namespace arfdx;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> quick(const std::string& cmd, const fs::path& dir) {
  return {cmd,
          "--seed",
          "7",
          "--out",
          dir.string(),
          "--set",
          "synth.n_patients=150",
          "train.learning_rates=0.1",
          "train.momenta=0.9",
          "train.weight_decays=1e-4",
          "train.max_epochs=8",
          "explain.repetitions=2"};
}

const std::vector<std::string> kStages{"synth", "label", "split", "featurize", "train", "evaluate", "explain"};

void run_pipeline(const fs::path& dir) {
  for (const auto& stage : kStages) {
    const auto r = run_cli(quick(stage, dir));
    ASSERT_EQ(r.code, 0) << stage << ": " << r.err;
  }
}

}  // namespace

TEST(Cli, FullPipelineDeterministic) {
  const auto a = arfdx::testing::scratch_dir("cli_a");
  const auto b = arfdx::testing::scratch_dir("cli_b");
  run_pipeline(a);
  run_pipeline(b);
  for (const char* name : {"labels.csv", "agreement.csv", "splits.csv", "missingness.csv", "sweep.csv",
                           "metrics.csv", "summary.csv", "physician.csv", "importance.csv", "cohort.ndjson"}) {
    ASSERT_TRUE(fs::exists(a / name)) << name;
    EXPECT_EQ(read_text_file(a / name), read_text_file(b / name)) << name;
  }
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file() || entry.path().extension() == ".bin") continue;
    const std::string text = read_text_file(entry.path());
    EXPECT_EQ(text.rfind("# arfdx ", 0), 0u) << entry.path();
  }
  const std::string metrics = read_text_file(a / "metrics.csv");
  EXPECT_NE(metrics.find("command=evaluate seed=7 config="), std::string::npos);
  EXPECT_NE(metrics.find("combined,0,pneumonia,auroc,"), std::string::npos);
}

TEST(Cli, StagesDoNotMutateInputs) {
  const auto dir = arfdx::testing::scratch_dir("cli_inputs");
  for (const std::string stage : {"synth", "label", "split"}) ASSERT_EQ(run_cli(quick(stage, dir)).code, 0);
  const std::string cohort = read_text_file(dir / "cohort.ndjson");
  const std::string labels = read_text_file(dir / "labels.csv");
  ASSERT_EQ(run_cli(quick("featurize", dir)).code, 0);
  EXPECT_EQ(read_text_file(dir / "cohort.ndjson"), cohort);
  EXPECT_EQ(read_text_file(dir / "labels.csv"), labels);
}

TEST(Cli, EvaluateWithoutCheckpointIsIoError) {
  const auto dir = arfdx::testing::scratch_dir("cli_nockpt");
  for (const std::string stage : {"synth", "label", "split", "featurize"}) ASSERT_EQ(run_cli(quick(stage, dir)).code, 0);
  const auto r = run_cli(quick("evaluate", dir));
  EXPECT_EQ(r.code, cli::kExitConfigError);
  EXPECT_NE(r.err.find("missing checkpoint"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("ehr_split0.json"), std::string::npos) << r.err;
}

TEST(Cli, UnknownConfigKey) {
  const auto dir = arfdx::testing::scratch_dir("cli_badkey");
  const auto r = run_cli({"synth", "--seed", "1", "--out", dir.string(), "--set", "synth.nonsense=3"});
  EXPECT_EQ(r.code, cli::kExitConfigError);
  EXPECT_NE(r.err.find("synth.nonsense"), std::string::npos) << r.err;
}

TEST(Cli, MissingSeed) {
  const auto dir = arfdx::testing::scratch_dir("cli_noseed");
  EXPECT_EQ(run_cli({"synth", "--out", dir.string()}).code, cli::kExitConfigError);
}

TEST(Cli, MissingInputIsIoError) {
  const auto dir = arfdx::testing::scratch_dir("cli_noinput");
  EXPECT_EQ(run_cli({"label", "--seed", "1", "--out", dir.string()}).code, cli::kExitConfigError);
}

TEST(Cli, UnknownSubcommandAndHelp) {
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitConfigError);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(run_cli({}).code, cli::kExitConfigError);
}

TEST(Cli, ModuleErrorExitCode) {
  const auto dir = arfdx::testing::scratch_dir("cli_module");
  const auto r = run_cli({"synth", "--seed", "1", "--out", dir.string(), "--set", "synth.prevalences=0.3,1.5,0.1"});
  EXPECT_EQ(r.code, cli::kExitModuleError) << r.err;
}

TEST(Config, IniFileAndOverrides) {
  const auto dir = arfdx::testing::scratch_dir("cli_config");
  write_file_atomic(dir / "run.ini", "[run]\nseed = 42\n\n[train]\nbatch_size = 16\n");
  const auto cfg = cli::RunConfig::load(dir / "run.ini", {"train.batch_size=8"});
  EXPECT_EQ(cfg.seed(), 42u);
  EXPECT_EQ(cfg.get_size("train.batch_size"), 8u);
  EXPECT_EQ(cfg.get_doubles("synth.prevalences"), (std::vector<double>{0.31, 0.22, 0.09}));
  EXPECT_EQ(cfg.get_list("train.families"), (std::vector<std::string>{"ehr", "image", "combined"}));
}

TEST(Config, RejectsUnknownAndMalformed) {
  const auto dir = arfdx::testing::scratch_dir("cli_config_bad");
  write_file_atomic(dir / "bad.ini", "[train]\nbogus = 1\n");
  EXPECT_THROW(cli::RunConfig::load(dir / "bad.ini", {}), cli::ConfigError);
  EXPECT_THROW(cli::RunConfig::load(std::nullopt, {"noequals"}), cli::ConfigError);
  EXPECT_THROW(cli::RunConfig::load(std::nullopt, {"nosection=1"}), cli::ConfigError);
  const auto cfg = cli::RunConfig::load(std::nullopt, {"train.batch_size=abc"});
  EXPECT_THROW(cfg.get_size("train.batch_size"), cli::ConfigError);
  EXPECT_THROW(cfg.seed(), cli::ConfigError);
}

TEST(Config, HashIgnoresOutputDirectory) {
  const auto a = cli::RunConfig::load(std::nullopt, {"run.seed=1", "run.out=/tmp/x"});
  const auto b = cli::RunConfig::load(std::nullopt, {"run.seed=1", "run.out=/tmp/y"});
  const auto c = cli::RunConfig::load(std::nullopt, {"run.seed=2", "run.out=/tmp/x"});
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
}
