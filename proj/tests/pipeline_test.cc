// Copyright 2026 The Versebias Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "versebias/pipeline.h"

#include <gtest/gtest.h>
#include <unistd.h>

#include "support/workspace_fixture.h"
#include "versebias/hash.h"

namespace versebias::pipeline {
namespace {

using nlohmann::json;

TEST(PipelineConfigTest, RejectsUnknownKeys) {
  auto root = testing::FreshTempDir("vb_cfg");
  auto j = testing::WriteTinyWorkspace(root);
  EXPECT_NO_THROW(PipelineConfig::FromJson(j, root));
  for (auto [section, key] : std::vector<std::pair<std::string, std::string>>{
           {"", "colour"},
           {"paths", "corpse"},
           {"training", "stepz"},
           {"encoder", "vocab_size"},
           {"tokenizer", "size"},
           {"service", "tls"}}) {
    json bad = j;
    (section.empty() ? bad : bad[section])[key] = 1;
    EXPECT_THROW(PipelineConfig::FromJson(bad, root), std::invalid_argument)
        << section << "." << key;
  }
  std::filesystem::remove_all(root);
}

TEST(PipelineConfigTest, ResolvesPathsAndAppliesSeed) {
  auto root = testing::FreshTempDir("vb_cfg2");
  auto c = testing::TinyPipelineConfig(root);
  EXPECT_EQ(c.paths.corpus, root / "poems.jsonl");
  EXPECT_EQ(c.paths.out_dir, root / "out");
  EXPECT_EQ(c.training.seed, 5u);
  EXPECT_EQ(c.augment.seed, 5u);
  EXPECT_EQ(c.sentiment.seed, 5u);
  c.ApplySeed(9);
  EXPECT_EQ(c.training.seed, 9u);
  auto again = PipelineConfig::FromJson(c.ToJson(), "/");
  EXPECT_EQ(again.ToJson(), c.ToJson());
  std::filesystem::remove_all(root);
}

TEST(PipelineConfigTest, ValidatesBeforeRunning) {
  auto root = testing::FreshTempDir("vb_cfg3");
  auto c = testing::TinyPipelineConfig(root);
  c.tokenizer.vocab_size = 100;
  EXPECT_THROW(Workspace{c}, std::invalid_argument);
  c = testing::TinyPipelineConfig(root);
  c.encoder.num_heads = 3;
  EXPECT_THROW(Workspace{c}, std::invalid_argument);
  std::filesystem::remove_all(root);
}

TEST(ModelNameTest, ParsesBothTags) {
  EXPECT_EQ(ParseModel("baseline"), Model::kBaseline);
  EXPECT_EQ(ModelName(Model::kAugmented), "augmented");
  EXPECT_THROW(ParseModel("other"), std::invalid_argument);
}

class WorkspaceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = testing::FreshTempDir("vb_ws");
    config_ = testing::TinyPipelineConfig(root_);
  }
  void TearDown() override { std::filesystem::remove_all(root_); }
  std::filesystem::path root_;
  PipelineConfig config_;
};

TEST_F(WorkspaceTest, EvalBeforeTrainingNamesMissingStage) {
  Workspace ws(config_);
  ws.Ingest();
  ws.TrainSentiment();
  ws.TrainTokenizer();
  try {
    ws.EvalBias(Model::kBaseline);
    FAIL() << "expected a dependency error";
  } catch (const DependencyError& e) {
    EXPECT_EQ(e.stage(), "train-retriever:baseline");
    EXPECT_NE(std::string(e.what()).find("versebias train-retriever baseline"),
              std::string::npos);
  }
  EXPECT_THROW(ws.Augment(), DependencyError);
}

TEST_F(WorkspaceTest, FullRunIsFreshAndReproducible) {
  Workspace ws(config_);
  json summary = ws.RunAll();
  EXPECT_EQ(summary["ingest"]["pairs"].get<int>() > 100, true);
  for (const auto& stage : StageNames()) {
    auto s = ws.Status(stage);
    EXPECT_EQ(s.state, StageStatus::State::kFresh) << stage << ": " << s.reason;
  }
  std::string manifest = ReadFile(ws.Artifact("manifest.json"));

  auto other = config_;
  other.paths.out_dir = root_ / "out2";
  Workspace ws2(other);
  ws2.RunAll();
  EXPECT_EQ(ReadFile(ws2.Artifact("manifest.json")), manifest);

  // Re-running one stage with unchanged inputs keeps the manifest identical.
  ws.TrainRetriever(Model::kBaseline);
  EXPECT_EQ(ReadFile(ws.Artifact("manifest.json")), manifest);
}

TEST_F(WorkspaceTest, EditedArtifactMakesDownstreamStale) {
  Workspace ws(config_);
  ws.Ingest();
  ws.TrainTokenizer();
  WriteFile(ws.Artifact("tokenizer/vocab.bpe"), "tampered");
  EXPECT_EQ(ws.Status("train-tokenizer").state, StageStatus::State::kStale);
  try {
    ws.TrainRetriever(Model::kBaseline);
    FAIL() << "expected a dependency error";
  } catch (const DependencyError& e) {
    EXPECT_EQ(e.stage(), "train-tokenizer");
    EXPECT_NE(std::string(e.what()).find("stale"), std::string::npos);
  }
}

TEST_F(WorkspaceTest, ChangedInputsAndConfigInvalidateStages) {
  Workspace ws(config_);
  ws.Ingest();
  ws.TrainTokenizer();
  WriteFile(config_.paths.corpus,
            ReadFile(config_.paths.corpus) +
                R"({"poem_id":"x","position":0,"text":"a"})" "\n" +
                R"({"poem_id":"x","position":1,"text":"b"})" "\n");
  EXPECT_EQ(ws.Status("ingest").state, StageStatus::State::kStale);
  EXPECT_EQ(ws.Status("train-tokenizer").state, StageStatus::State::kStale);
  ws.Ingest();
  EXPECT_EQ(ws.Status("train-tokenizer").state, StageStatus::State::kStale);

  auto changed = config_;
  changed.tokenizer.vocab_size = 330;
  ws.TrainTokenizer();
  Workspace ws2(changed);
  EXPECT_EQ(ws2.Status("train-tokenizer").state, StageStatus::State::kStale);
  EXPECT_EQ(ws2.Status("ingest").state, StageStatus::State::kFresh);
}

TEST_F(WorkspaceTest, LockIsExclusive) {
  std::filesystem::create_directories(config_.paths.out_dir);
  {
    OutputLock lock(config_.paths.out_dir);
    EXPECT_THROW(OutputLock{config_.paths.out_dir}, LockError);
  }
  EXPECT_NO_THROW(OutputLock{config_.paths.out_dir});
  // A lock left by a process that no longer exists is reclaimed.
  WriteFile(config_.paths.out_dir / ".versebias.lock", "999999999\n");
  EXPECT_NO_THROW(OutputLock{config_.paths.out_dir});
  WriteFile(config_.paths.out_dir / ".versebias.lock",
            std::to_string(::getppid()) + "\n");
  EXPECT_THROW(OutputLock{config_.paths.out_dir}, LockError);
}

}  // namespace
}  // namespace versebias::pipeline
