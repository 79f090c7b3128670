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


#include "versebias/bias_eval.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "versebias/random.h"

namespace versebias {
namespace {

using L = SentimentLabel;

TEST(BuildPromptsTest, SingularThenPlural) {
  MentionLexicon lex({{"men", "man", "men"}}, {});
  auto prompts = BuildPrompts(lex);
  ASSERT_EQ(prompts.size(), 2u);
  EXPECT_EQ(prompts[0].text, "The man");
  EXPECT_EQ(prompts[1].text, "The men");
  EXPECT_EQ(prompts[0].group, "men");
  EXPECT_EQ(prompts[0].list, MentionList::kDemographic);
}

TEST(BuildPromptsTest, DefaultLexiconCounts) {
  auto prompts = BuildPrompts(MentionLexicon::Default());
  int demographic = 0, other = 0;
  for (const auto& p : prompts) {
    (p.list == MentionList::kDemographic ? demographic : other)++;
    EXPECT_EQ(p.text.rfind("The ", 0), 0u);
  }
  EXPECT_EQ(demographic, 50);
  EXPECT_EQ(other, 48);
}

TEST(BuildPromptsTest, EmptyLexicon) {
  EXPECT_TRUE(BuildPrompts(MentionLexicon{}).empty());
}

// Two demographic prompts, three hand-labelled suggestions each.
BiasReport Fixture(const std::string& tag,
                   const std::map<std::string, L>& labels) {
  std::vector<Prompt> prompts = {{"The man", "men", MentionList::kDemographic},
                                 {"The girls", "girls", MentionList::kDemographic}};
  std::map<std::string, std::vector<std::string>> pool = {
      {"The man", {"m1", "m2", "m3", "m4"}},
      {"The girls", {"g1", "g2", "g3"}}};
  return EvaluateModel(
      tag, prompts, 3,
      [&](const std::string& p, int k) {
        auto v = pool.at(p);
        v.resize(std::min<size_t>(v.size(), k));
        return v;
      },
      [&](const std::string& v) { return labels.at(v); });
}

const std::map<std::string, L> kBaseLabels = {
    {"m1", L::kPositive}, {"m2", L::kNegative}, {"m3", L::kNoImpact},
    {"m4", L::kNegative}, {"g1", L::kPositive}, {"g2", L::kPositive},
    {"g3", L::kNoImpact}};
const std::map<std::string, L> kAugLabels = {
    {"m1", L::kPositive}, {"m2", L::kPositive}, {"m3", L::kPositive},
    {"m4", L::kNegative}, {"g1", L::kPositive}, {"g2", L::kNoImpact},
    {"g3", L::kNoImpact}};

TEST(EvaluateModelTest, HandComputedFixture) {
  auto r = Fixture("baseline", kBaseLabels);
  ASSERT_EQ(r.prompts.size(), 2u);
  EXPECT_EQ(r.prompts[0].verses.size(), 3u);
  EXPECT_EQ(r.prompts[0].verses[1].score, -1);
  // Scores {1, -1, 0, 1, 1, 0}: mean 1/3, population variance 5/9.
  auto s = r.Summary(MentionList::kDemographic);
  EXPECT_EQ(s.count, 6);
  EXPECT_NEAR(s.mean, 1.0 / 3, 1e-12);
  EXPECT_NEAR(s.std_dev, std::sqrt(5.0) / 3, 1e-12);
  EXPECT_NEAR(s.group_means.at("men"), 0.0, 1e-12);
  EXPECT_NEAR(s.group_means.at("girls"), 2.0 / 3, 1e-12);
  auto o = r.Summary(MentionList::kOther);
  EXPECT_EQ(o.count, 0);
  EXPECT_EQ(o.mean, 0.0);
}

TEST(EvaluateModelTest, AllNeutralGivesZeroMeanAndSpread) {
  std::map<std::string, L> neutral;
  for (auto& [k, v] : kBaseLabels) neutral[k] = L::kNoImpact;
  auto s = Fixture("x", neutral).Summary(MentionList::kDemographic);
  EXPECT_EQ(s.mean, 0.0);
  EXPECT_EQ(s.std_dev, 0.0);
}

TEST(EvaluateModelTest, RejectsNonPositiveK) {
  EXPECT_THROW(EvaluateModel("x", {}, 0, {}, {}), std::invalid_argument);
}

TEST(EvaluateModelTest, SummaryBoundsOnRandomReports) {
  UniformStream rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    BiasReport r;
    r.k = 4;
    for (int p = 0; p < 3; ++p) {
      PromptResult pr{{"The x", "g" + std::to_string(p), MentionList::kOther}, {}};
      for (int v = 0; v < 4; ++v) {
        L l = static_cast<L>(rng.Below(3));
        pr.verses.push_back({"v", l, NumericScore(l)});
      }
      r.prompts.push_back(pr);
    }
    auto s = r.Summary(MentionList::kOther);
    EXPECT_LE(std::abs(s.mean), 1.0);
    EXPECT_GE(s.std_dev, 0.0);
    EXPECT_LE(s.std_dev, 1.0);
  }
}

TEST(BiasReportTest, JsonRoundTripAndSelfConsistency) {
  auto r = Fixture("baseline", kBaseLabels);
  auto j = r.ToJson();
  auto back = BiasReport::FromJson(j);
  EXPECT_EQ(back.ToJson(), j);
  j["demographic"]["mean"] = 0.9;
  EXPECT_THROW(BiasReport::FromJson(j), std::invalid_argument);
}

TEST(CompareTest, IdenticalReportsGiveZeroDeltas) {
  auto r = Fixture("a", kBaseLabels);
  auto c = Compare(r, r);
  EXPECT_EQ(c.demographic.delta_mean, 0.0);
  EXPECT_EQ(c.demographic.delta_std, 0.0);
  for (const auto& p : c.prompts) EXPECT_EQ(p.delta, 0.0);
}

TEST(CompareTest, FixtureDeltasMatchHandArithmetic) {
  auto c = Compare(Fixture("baseline", kBaseLabels),
                   Fixture("augmented", kAugLabels));
  // Augmented scores {1, 1, 1, 1, 0, 0}: mean 2/3, variance 2/9.
  EXPECT_NEAR(c.demographic.augmented.mean, 2.0 / 3, 1e-12);
  EXPECT_NEAR(c.demographic.delta_mean, 1.0 / 3, 1e-12);
  EXPECT_NEAR(c.demographic.delta_std, (std::sqrt(2.0) - std::sqrt(5.0)) / 3,
              1e-12);
  ASSERT_EQ(c.prompts.size(), 2u);
  EXPECT_NEAR(c.prompts[0].delta, 1.0, 1e-12);
  EXPECT_NEAR(c.prompts[1].delta, -1.0 / 3, 1e-12);
  EXPECT_EQ(c.ToJson()["demographic"]["mean_shift"], "up");
  auto table = c.ToTable();
  EXPECT_NE(table.find("demographic"), std::string::npos);
  EXPECT_NE(table.find("+0.333"), std::string::npos);
}

TEST(CompareTest, MismatchedReportsThrow) {
  auto a = Fixture("a", kBaseLabels);
  auto b = a;
  b.prompts[1].prompt.text = "The boys";
  EXPECT_THROW(Compare(a, b), std::invalid_argument);
  b = a;
  b.k = 5;
  EXPECT_THROW(Compare(a, b), std::invalid_argument);
  b = a;
  b.prompts.pop_back();
  EXPECT_THROW(Compare(a, b), std::invalid_argument);
}

TEST(EvaluateModelTest, IndexOverloadRanksAndLabels) {
  retriever::EncoderConfig cfg;
  SubwordVocab vocab;
  cfg.vocab_size = vocab.size();
  cfg.model_dim = 8;
  cfg.num_layers = 1;
  cfg.ff_hidden = 8;
  cfg.head_hidden = 8;
  cfg.embedding_dim = 4;
  retriever::Retriever r{vocab, retriever::ModelParams<float>::Zeros(cfg)};
  auto index = retriever::VerseIndex::Build(
      {"joy and sweet delight", "the stone", "grief and sorrow"}, r);
  std::vector<LabeledVerse> train = {
      {"i cried in grief and sorrow", L::kNegative},
      {"the river and the stone", L::kNoImpact},
      {"joy and sweet delight", L::kPositive}};
  auto model = SentimentModel::Train(train, {}, SentimentConfig{});
  auto report = EvaluateModel("zero", index, r,
                              BuildPrompts(MentionLexicon({{"men", "man", "men"}}, {})),
                              2, model);
  ASSERT_EQ(report.prompts.size(), 2u);
  // Zero parameters tie every score, so the pool order decides.
  EXPECT_EQ(report.prompts[0].verses[0].verse, "joy and sweet delight");
  EXPECT_EQ(report.prompts[0].verses[0].score, 1);
  EXPECT_EQ(report.prompts[0].verses[1].score, 0);
}

}  // namespace
}  // namespace versebias
