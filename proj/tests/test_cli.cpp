#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wic/experiment.hpp"

using namespace wic;
using wic::testing::read_file;
using wic::testing::run_command;
using wic::testing::write_file;

namespace {

const std::string kWic = WIC_CLI_PATH;

// Shared synthetic data set and a small training config next to it.
class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new wic::testing::TempDir("cli");
    const auto r = run_command(kWic + " synth --out " + (*dir_ / "data") + " --words 8 --examples 140 --seed 2",
                               *dir_ / "synth.log");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    write_file(*dir_ / "small.json", R"({
  "data": {"main_train": "data/train.jsonl", "main_dev": "data/dev.jsonl", "main_test": "data/test.jsonl",
           "aux_train": "data/test.jsonl"},
  "train": {"epochs": 3, "embed_dim": 12, "hidden_dim": 16, "batch_size": 8},
  "out": "run"
})");
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  static std::string path(const std::string& name) { return *dir_ / name; }
  static wic::testing::CommandResult run(const std::string& args, const std::string& log = "cmd.log") {
    return run_command(kWic + " " + args, path(log));
  }

  static wic::testing::TempDir* dir_;
};

wic::testing::TempDir* Cli::dir_ = nullptr;

}  // namespace

TEST_F(Cli, TrainWritesArtifactsAndHonoursOverrides) {
  const auto r = run("train --config " + path("small.json") + " --out " + path("run_a") +
                     " --mixing.kind Sub --mixing.sub_ratio 0.5");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  for (const char* f : {"manifest.json", "snapshot.json", "history.tsv", "dev_report.json", "test_report.json"}) {
    EXPECT_TRUE(std::filesystem::exists(path("run_a/") + f)) << f;
  }
  const auto history = read_file(path("run_a/history.tsv"));
  EXPECT_EQ(std::count(history.begin(), history.end(), '\n'), 1 + 3);

  const auto manifest = nlohmann::json::parse(read_file(path("run_a/manifest.json")));
  EXPECT_EQ(manifest["config"]["mixing"]["kind"], "Sub");
  EXPECT_EQ(manifest["config"]["mixing"]["sub_ratio"], 0.5);
  const auto& overrides = manifest["overrides"];
  EXPECT_NE(std::find(overrides.begin(), overrides.end(), "--mixing.kind Sub"), overrides.end());
  EXPECT_EQ(manifest["inputs"]["main_train"]["fnv1a64"], file_hash(path("data/train.jsonl")));
  EXPECT_TRUE(manifest["inputs"].contains("aux_train"));
}

TEST_F(Cli, RerunFromManifestIsIdentical) {
  ASSERT_EQ(run("train --config " + path("small.json") + " --out " + path("det_a")).exit_code, 0);
  const auto r = run("train --config " + path("det_a/manifest.json") + " --out " + path("det_b"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  for (const char* f : {"history.tsv", "snapshot.json", "dev_report.json"}) {
    EXPECT_EQ(read_file(path("det_a/") + f), read_file(path("det_b/") + f)) << f;
  }
}

TEST_F(Cli, PredictThenScoreMatchesDevReport) {
  ASSERT_EQ(run("train --config " + path("small.json") + " --out " + path("ps")).exit_code, 0);
  const auto dev_report = nlohmann::json::parse(read_file(path("ps/dev_report.json")));
  for (const char* p : {"classifier", "similarity"}) {
    const std::string pred = path(std::string("ps/dev.") + p + ".tsv");
    auto r = run("predict --snapshot " + path("ps/snapshot.json") + " --data " + path("data/dev.jsonl") +
                 " --path " + p + " --out " + pred);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    r = run("score --pred " + pred + " --gold " + path("data/dev.jsonl"));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const auto report = nlohmann::json::parse(read_file(pred + ".report.json"));
    EXPECT_EQ(report["macro_f1"], dev_report[p]["macro_f1"]) << p;
    EXPECT_NE(r.output.find("macro_f1"), std::string::npos);
  }
}

TEST_F(Cli, ScoreMissingIdFails) {
  ASSERT_EQ(run("train --config " + path("small.json") + " --out " + path("miss") + " --train.epochs 1").exit_code, 0);
  const std::string pred = path("miss/dev.tsv");
  ASSERT_EQ(run("predict --snapshot " + path("miss/snapshot.json") + " --data " + path("data/dev.jsonl") +
                " --out " + pred)
                .exit_code,
            0);
  auto text = read_file(pred);
  const auto first_line_end = text.find('\n');
  const std::string dropped_id = text.substr(0, text.find('\t'));
  write_file(pred, text.substr(first_line_end + 1));
  const auto r = run("score --pred " + pred + " --gold " + path("data/dev.jsonl"));
  EXPECT_NE(r.exit_code, 0);
  EXPECT_NE(r.output.find(dropped_id), std::string::npos) << r.output;
}

TEST_F(Cli, MixNoReproducesMainFile) {
  const auto r = run("mix --main " + path("data/train.jsonl") + " --kind No --out " + path("mixed_no.jsonl"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(read_file(path("mixed_no.jsonl")), read_file(path("data/train.jsonl")));

  ASSERT_EQ(run("mix --main " + path("data/train.jsonl") + " --aux " + path("data/test.jsonl") +
                " --kind Sub --sub-ratio 0.25 --seed 4 --out " + path("mixed_sub.jsonl"))
                .exit_code,
            0);
  const auto mixed = load_examples(path("mixed_sub.jsonl"), DataFormat::canonical);
  EXPECT_EQ(mixed.size(), 80u + 20u);
  EXPECT_EQ(std::count_if(mixed.begin(), mixed.end(), [](const auto& ex) { return ex.source == Source::auxiliary; }),
            20);
  EXPECT_TRUE(std::filesystem::exists(path("mixed_sub.jsonl.manifest.json")));
}

TEST_F(Cli, TuneWritesTrialLogAndBestConfig) {
  write_file(path("space.json"), R"({"learning_rate": {"log_uniform": [1e-3, 1e-2]}, "epochs": {"int_uniform": [1, 2]}})");
  const auto r = run("tune --config " + path("small.json") + " --out " + path("tune") + " --space " +
                     path("space.json") + " --trials 3 --search-seed 5");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto log = read_file(path("tune/trials.jsonl"));
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 3);
  EXPECT_TRUE(std::filesystem::exists(path("tune/ranking.tsv")));
  // the best config trains directly
  const auto t = run("train --config " + path("tune/best_config.json") + " --out " + path("tune/best_run"));
  EXPECT_EQ(t.exit_code, 0) << t.output;
}

TEST_F(Cli, UsageErrors) {
  auto r = run("train --config " + path("small.json") + " --bogus");
  EXPECT_NE(r.exit_code, 0);
  r = run("frobnicate");
  EXPECT_NE(r.exit_code, 0);
  r = run("train --config " + path("small.json") + " --train.epochz 3");
  EXPECT_NE(r.exit_code, 0);
  EXPECT_NE(r.output.find("train.epochz"), std::string::npos) << r.output;
  r = run("score --pred " + path("nope.tsv") + " --gold " + path("data/dev.jsonl"));
  EXPECT_NE(r.exit_code, 0);
  r = run("train --config " + path("missing.json"));
  EXPECT_NE(r.exit_code, 0);
}
