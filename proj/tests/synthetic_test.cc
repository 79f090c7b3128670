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


#include "versebias/synthetic.h"

#include <gtest/gtest.h>

#include <regex>
#include <set>
#include <sstream>

namespace versebias::synthetic {
namespace {

TEST(TopicPairsTest, PairsShareAPlaceAndRepeatBySeed) {
  auto pairs = TopicPairs(50, 9);
  ASSERT_EQ(pairs.size(), 50u);
  for (const auto& [x, y] : pairs) {
    std::set<std::string> words;
    std::istringstream in(x);
    for (std::string w; in >> w;) words.insert(w);
    std::istringstream out(y);
    bool shared = false;
    for (std::string w; out >> w;) {
      if (w != "the" && words.count(w)) shared = true;
    }
    EXPECT_TRUE(shared) << x << " / " << y;
  }
  EXPECT_EQ(TopicPairs(50, 9), pairs);
  EXPECT_NE(TopicPairs(50, 10), pairs);
}

TEST(PoemCorpusTest, ShapeAndDeterminism) {
  auto lex = MentionLexicon::Default();
  PoemCorpusConfig cfg;
  cfg.poems = 30;
  auto corpus = PoemCorpus(cfg, lex);
  ASSERT_EQ(corpus.poems.size(), 30u);
  for (const auto& poem : corpus.poems) {
    EXPECT_GE(poem.size(), 5u);
    EXPECT_LE(poem.size(), 9u);
    for (size_t i = 0; i < poem.size(); ++i) EXPECT_EQ(poem[i].position, int(i));
  }
  auto again = PoemCorpus(cfg, lex);
  EXPECT_EQ(again.AllVerses(), corpus.AllVerses());
}

TEST(PoemCorpusTest, NegativeRateFollowsDemographicMentions) {
  auto lex = MentionLexicon::Default();
  PoemCorpusConfig cfg;
  cfg.poems = 3000;
  auto pairs = PoemCorpus(cfg, lex).AllPairs();
  const std::regex negative(
      "grief|sorrow|weeps|despair|pain|mourns|gloom|tears|misery|curses|"
      "scorn|anguish");
  long n[2] = {0, 0}, neg[2] = {0, 0};
  for (const auto& p : pairs) {
    int row = HasDemographicMention(p.input.text, lex) ? 0 : 1;
    ++n[row];
    if (std::regex_search(p.next.text, negative)) ++neg[row];
  }
  ASSERT_GT(n[0], 2000);
  EXPECT_NEAR(double(neg[0]) / n[0], 0.25, 0.02);
  EXPECT_NEAR(double(neg[1]) / n[1], 0.13, 0.02);
}

TEST(SentimentDatasetTest, SizeAndClassMix) {
  auto data = SentimentDataset(2000, 4);
  ASSERT_EQ(data.size(), 2000u);
  long counts[3] = {0, 0, 0};
  for (const auto& v : data) ++counts[ClassIndex(v.label)];
  EXPECT_NEAR(counts[0] / 2000.0, 0.18, 0.03);
  EXPECT_NEAR(counts[1] / 2000.0, 0.66, 0.03);
}

}  // namespace
}  // namespace versebias::synthetic
