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


#include "versebias/sentiment.h"

#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

namespace versebias {
namespace {

constexpr SentimentLabel kAll[] = {
    SentimentLabel::kNegative, SentimentLabel::kNoImpact,
    SentimentLabel::kPositive, SentimentLabel::kMixed,
    SentimentLabel::kNonsense};

std::vector<LabeledVerse> ToySet() {
  return {
      {"the cruel night of grief", SentimentLabel::kNegative, Split::kTrain},
      {"the river runs to the sea", SentimentLabel::kNoImpact, Split::kTrain},
      {"sweet joy of the morning", SentimentLabel::kPositive, Split::kTrain},
  };
}

TEST(SentimentTest, NumericScores) {
  EXPECT_EQ(NumericScore(SentimentLabel::kNegative), -1);
  EXPECT_EQ(NumericScore(SentimentLabel::kNoImpact), 0);
  EXPECT_EQ(NumericScore(SentimentLabel::kPositive), 1);
  EXPECT_THROW(NumericScore(SentimentLabel::kMixed), std::invalid_argument);
}

TEST(SentimentTest, ResolveAnnotationsOverFullGrid) {
  for (auto a : kAll) {
    for (auto b : kAll) {
      auto r = ResolveAnnotations({"text", a, b});
      bool expect = a == b && IsPolarity(a);
      EXPECT_EQ(r.has_value(), expect);
      if (r) EXPECT_EQ(r->label, a);
    }
  }
  EXPECT_FALSE(ResolveAnnotations({"x", SentimentLabel::kNegative,
                                   SentimentLabel::kPositive}));
  EXPECT_FALSE(
      ResolveAnnotations({"x", SentimentLabel::kMixed, SentimentLabel::kMixed}));
}

TEST(SentimentTest, EmptyStatsAreZero) {
  DatasetStats s = ComputeDatasetStats({});
  EXPECT_EQ(s.Total(), 0);
  EXPECT_EQ(s.At(Split::kTest, SentimentLabel::kPositive), 0);
}

TEST(SentimentTest, StatsCountEachCell) {
  std::vector<LabeledVerse> d = {
      {"a", SentimentLabel::kNegative, Split::kTrain},
      {"b", SentimentLabel::kNegative, Split::kTrain},
      {"c", SentimentLabel::kPositive, Split::kDev},
      {"d", SentimentLabel::kNoImpact, Split::kTest},
  };
  DatasetStats s = ComputeDatasetStats(d);
  EXPECT_EQ(s.At(Split::kTrain, SentimentLabel::kNegative), 2);
  EXPECT_EQ(s.At(Split::kDev, SentimentLabel::kPositive), 1);
  EXPECT_EQ(s.At(Split::kTest, SentimentLabel::kNoImpact), 1);
  EXPECT_EQ(s.SplitTotal(Split::kTrain), 2);
  EXPECT_EQ(s.Total(), 4);
}

TEST(SentimentTest, ParsesLabeledTsvAndDropsMixed) {
  std::string tsv =
      "0\tand that is why, the lonesome day,\t-1\n"
      "1\twith pale blue berries. in these peaceful shades--\t1\n"
      "\n"
      "2\tthe road goes on\t0\n"
      "3\tjoy and sorrow\t2\n";
  LoadedDataset d = ParseLabeledTsv(tsv, Split::kDev, LabelMap::Default());
  ASSERT_EQ(d.verses.size(), 3u);
  EXPECT_EQ(d.excluded, 1);
  EXPECT_EQ(d.verses[0].label, SentimentLabel::kNegative);
  EXPECT_EQ(d.verses[1].label, SentimentLabel::kPositive);
  EXPECT_EQ(d.verses[2].split, Split::kDev);
  EXPECT_THROW(ParseLabeledTsv("only one field\n", Split::kTrain,
                               LabelMap::Default()),
               std::invalid_argument);
  EXPECT_THROW(ParseLabeledTsv("0\ttext\t7\n", Split::kTrain,
                               LabelMap::Default()),
               std::invalid_argument);
}

TEST(SentimentTest, LabelMapFromJson) {
  auto m = LabelMap::FromJson(
      {{"neg", "negative"}, {"pos", "positive"}, {"none", "no_impact"}});
  EXPECT_EQ(m.Map("neg"), SentimentLabel::kNegative);
  EXPECT_EQ(m.Map("none"), SentimentLabel::kNoImpact);
  EXPECT_THROW(m.Map("other"), std::invalid_argument);
  EXPECT_THROW(LabelMap::FromJson({{"x", "sad"}}), std::invalid_argument);
}

TEST(SentimentTest, StratifiedSplitIsSeededAndProportional) {
  std::vector<LabeledVerse> d;
  for (int i = 0; i < 100; ++i) {
    d.push_back({"v" + std::to_string(i), SentimentLabel::kNoImpact});
  }
  auto a = d, b = d;
  StratifiedSplit(a, 5);
  StratifiedSplit(b, 5);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].split, b[i].split);
  DatasetStats s = ComputeDatasetStats(a);
  EXPECT_EQ(s.SplitTotal(Split::kTrain), 80);
  EXPECT_EQ(s.SplitTotal(Split::kDev), 10);
  EXPECT_EQ(s.SplitTotal(Split::kTest), 10);
}

TEST(SentimentTest, EmptyTextIsNoImpact) {
  auto model = SentimentModel::Train(ToySet(), {}, SentimentConfig{});
  Classification c = model.Classify("");
  EXPECT_EQ(c.label, SentimentLabel::kNoImpact);
  for (double p : c.probabilities) EXPECT_NEAR(p, 1.0 / 3, 1e-12);
}

TEST(SentimentTest, OneExamplePerClassIsLearnedExactly) {
  auto train = ToySet();
  auto model = SentimentModel::Train(train, {}, SentimentConfig{});
  EXPECT_DOUBLE_EQ(Accuracy(model, train), 1.0);
}

TEST(SentimentTest, MissingClassIsRejected) {
  auto train = ToySet();
  train.pop_back();
  EXPECT_THROW(SentimentModel::Train(train, {}, SentimentConfig{}),
               std::invalid_argument);
}

TEST(SentimentTest, TrainingIsDeterministic) {
  auto train = ToySet();
  auto a = SentimentModel::Train(train, train, SentimentConfig{});
  auto b = SentimentModel::Train(train, train, SentimentConfig{});
  EXPECT_EQ(a.ToJson().dump(), b.ToJson().dump());
}

TEST(SentimentTest, ProbabilitiesFormDistribution) {
  auto model = SentimentModel::Train(ToySet(), {}, SentimentConfig{});
  for (std::string t : {"cruel", "sweet morning", "unknown words here", "the"}) {
    auto c = model.Classify(t);
    double sum = 0;
    for (double p : c.probabilities) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_EQ(ClassIndex(c.label), ArgMax3(c.probabilities));
  }
}

TEST(SentimentTest, ArgMaxBreaksTiesInFixedOrder) {
  EXPECT_EQ(ArgMax3({0.0, 0.0, 0.0}), 0);
  EXPECT_EQ(ArgMax3({0.0, 1.0, 1.0}), 1);
  auto p = Softmax3({1000.0, 1000.0, 0.0});
  EXPECT_NEAR(p[0], 0.5, 1e-12);
}

TEST(SentimentTest, SaveLoadRoundTrip) {
  auto model = SentimentModel::Train(ToySet(), {}, SentimentConfig{});
  auto path = std::filesystem::temp_directory_path() / "vb_sentiment.json";
  model.Save(path);
  auto back = SentimentModel::Load(path);
  EXPECT_EQ(back.ToJson().dump(), model.ToJson().dump());
  EXPECT_EQ(back.Predict("cruel grief"), model.Predict("cruel grief"));
  std::filesystem::remove(path);
}

TEST(SentimentTest, ConfigRejectsUnknownKeys) {
  EXPECT_THROW(SentimentConfig::FromJson({{"epochz", 3}}),
               std::invalid_argument);
  EXPECT_EQ(SentimentConfig::FromJson({{"epochs", 3}}).epochs, 3);
}

}  // namespace
}  // namespace versebias
