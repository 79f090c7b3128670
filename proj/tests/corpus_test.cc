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


#include "versebias/corpus.h"

#include <random>

#include <gtest/gtest.h>

#include "versebias/text.h"

namespace versebias {
namespace {

Verse V(std::string text, int pos = 0) { return {std::move(text), "p", pos}; }

// Brute-force scan: every form at every token offset, leftmost then longest.
std::optional<Mention> BruteForceMention(std::string_view text,
                                         const MentionLexicon& lex) {
  auto tokens = WordTokens(text);
  for (size_t i = 0; i < tokens.size(); ++i) {
    std::optional<Mention> best;
    size_t best_len = 0;
    for (const auto& f : lex.forms()) {
      if (i + f.tokens.size() > tokens.size()) continue;
      bool ok = true;
      for (size_t k = 0; k < f.tokens.size(); ++k) {
        ok = ok && tokens[i + k] == f.tokens[k];
      }
      if (ok && f.tokens.size() > best_len) {
        best_len = f.tokens.size();
        best = Mention{f.group, f.surface, f.list};
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

TEST(CorpusTest, SplitIntoPairs) {
  std::vector<Verse> poem = {V("a", 0), V("b", 1), V("c", 2)};
  auto pairs = SplitIntoPairs(poem);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].input.text, "a");
  EXPECT_EQ(pairs[0].next.text, "b");
  EXPECT_EQ(pairs[1].next.text, "c");
  std::vector<Verse> one = {V("a")};
  EXPECT_TRUE(SplitIntoPairs(one).empty());
  std::vector<Verse> fig = {V("by the path an indian sat", 0),
                            V("then i cried and ran away", 1)};
  auto p = SplitIntoPairs(fig);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].input.text, "by the path an indian sat");
  EXPECT_EQ(p[0].next.text, "then i cried and ran away");
}

TEST(CorpusTest, FindMentionExamples) {
  auto lex = MentionLexicon::Default();
  auto m = FindMention(std::string_view("by the path an indian sat"), lex);
  ASSERT_TRUE(m);
  EXPECT_EQ(*m, (Mention{"indian", "indian", MentionList::kDemographic}));
  EXPECT_FALSE(FindMention(std::string_view("the sun rose red"), lex));
  auto w = FindMention(std::string_view("Women and men marched"), lex);
  ASSERT_TRUE(w);
  EXPECT_EQ(*w, (Mention{"woman", "women", MentionList::kDemographic}));
  EXPECT_FALSE(FindMention(std::string_view("the manor of womenfolk"), lex));
  auto multi = FindMention(std::string_view("the White People came"), lex);
  ASSERT_TRUE(multi);
  EXPECT_EQ(multi->surface, "white people");
  auto animal = FindMention(std::string_view("a deer ran"), lex);
  ASSERT_TRUE(animal);
  EXPECT_EQ(animal->list, MentionList::kOther);
  EXPECT_FALSE(HasDemographicMention("a deer ran", lex));
}

TEST(CorpusTest, DefaultLexiconSizes) {
  auto lex = MentionLexicon::Default();
  EXPECT_EQ(lex.groups(MentionList::kDemographic).size(), 25u);
  EXPECT_EQ(lex.groups(MentionList::kOther).size(), 24u);
  auto back = MentionLexicon::FromTsv(lex.ToTsv());
  EXPECT_EQ(back.forms().size(), lex.forms().size());
}

TEST(CorpusTest, LexiconRejectsFormInTwoGroups) {
  EXPECT_THROW(MentionLexicon::FromTsv("demographic\tman\tman\tmen\n"
                                       "other\tmen\tmen\tmens\n"),
               std::invalid_argument);
  EXPECT_THROW(MentionLexicon::FromTsv("people\tman\tman\tmen\n"),
               std::invalid_argument);
}

TEST(CorpusProperty, FindMentionAgreesWithBruteForce) {
  auto lex = MentionLexicon::Default();
  std::vector<std::string> words = {"the", "man",   "women", "white",
                                    "people", "dog", "deer", "black",
                                    "sat",  "indians", "person", "Men",
                                    "MAN,", "bird's", "asian", "sun"};
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    int n = 1 + static_cast<int>(rng() % 7);
    for (int i = 0; i < n; ++i) text += words[rng() % words.size()] + " ";
    EXPECT_EQ(FindMention(text, lex), BruteForceMention(text, lex)) << text;
  }
}

TEST(CorpusTest, SwapPronounsExamples) {
  auto map = PronounMap::Default();
  EXPECT_EQ(SwapGenderPronouns("she wore the belt", map), "he wore the belt");
  EXPECT_EQ(SwapGenderPronouns("The sun rose", map), "The sun rose");
  std::string s = "he gave his word";
  EXPECT_EQ(SwapGenderPronouns(SwapGenderPronouns(s, map), map), s);
  EXPECT_EQ(SwapGenderPronouns("She gave HIM her heart", map),
            "He gave HER his heart");
  EXPECT_EQ(SwapGenderPronouns("i saw her.", map), "i saw him.");
  EXPECT_EQ(SwapGenderPronouns("herself alone", map), "himself alone");
}

TEST(CorpusTest, StatsFromLabels) {
  auto lex = MentionLexicon::Default();
  std::vector<VersePair> pairs(4, {V("the sun"), V("the moon")});
  std::vector<SentimentLabel> labels(4, SentimentLabel::kNoImpact);
  auto s = ComputeCorpusStats(pairs, labels, lex);
  EXPECT_EQ(s.counts[1][0], 0);
  EXPECT_EQ(s.counts[1][1], 4);
  EXPECT_EQ(s.counts[1][2], 0);
  EXPECT_DOUBLE_EQ(s.RowPercent(1, 1), 100.0);
  EXPECT_EQ(s.RowTotal(0), 0);
}

TEST(CorpusTest, StatsMatchHandCountOnFixture) {
  auto lex = MentionLexicon::Default();
  std::vector<std::pair<std::string, SentimentLabel>> fixture = {
      {"the women", SentimentLabel::kNegative},
      {"a man", SentimentLabel::kNegative},
      {"the girls sang", SentimentLabel::kPositive},
      {"the sun", SentimentLabel::kNegative},
      {"the dog", SentimentLabel::kNoImpact},
      {"rain", SentimentLabel::kNoImpact},
      {"the asian hills", SentimentLabel::kNoImpact},
      {"night", SentimentLabel::kPositive},
      {"stars", SentimentLabel::kPositive},
      {"the boys", SentimentLabel::kNoImpact},
  };
  std::vector<VersePair> pairs;
  std::vector<SentimentLabel> labels;
  for (auto& [t, l] : fixture) {
    pairs.push_back({V(t), V("next")});
    labels.push_back(l);
  }
  auto s = ComputeCorpusStats(pairs, labels, lex);
  EXPECT_EQ(s.counts[0], (std::array<long, 3>{2, 2, 1}));
  EXPECT_EQ(s.counts[1], (std::array<long, 3>{1, 2, 2}));
  EXPECT_EQ(s.Total(), 10);
}

TEST(CorpusTest, ParsesJsonlAndSkipsMalformed) {
  std::string jsonl =
      R"({"poem_id":"a","position":1,"text":"second  line"})" "\n"
      R"({"poem_id":"a","position":0,"text":"first line"})" "\n"
      "not json\n"
      R"({"poem_id":"b","position":0,"text":"lonely"})" "\n"
      R"({"poem_id":"c","position":0,"text":"   "})" "\n";
  auto c = ParsePoemsJsonl(jsonl);
  ASSERT_EQ(c.poems.size(), 1u);
  EXPECT_EQ(c.poems[0][0].text, "first line");
  EXPECT_EQ(c.poems[0][1].text, "second line");
  EXPECT_EQ(c.skipped, 3);
  EXPECT_EQ(c.AllPairs().size(), 1u);
}

TEST(CorpusTest, ParsesPlainText) {
  auto c = ParsePoemsText("one\ntwo\nthree\n\n\nfour\nfive\n\nsix\n", "f");
  ASSERT_EQ(c.poems.size(), 2u);
  EXPECT_EQ(c.poems[0].size(), 3u);
  EXPECT_EQ(c.poems[1][0].poem_id, "f:1");
  EXPECT_EQ(c.AllPairs().size(), 3u);
}

}  // namespace
}  // namespace versebias
