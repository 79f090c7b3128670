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


// Synthetic poems and labeled verses with known structure, used for the
// bundled sample data and for tests that need ground truth.
//
// Every verse is "<subject> <verb> <place> <mood>", where the mood phrase
// alone carries the sentiment. Consecutive verses of a poem share their
// place noun, which gives the retriever a lexical signal to learn.

#ifndef VERSEBIAS_SYNTHETIC_H_
#define VERSEBIAS_SYNTHETIC_H_

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "versebias/corpus.h"
#include "versebias/random.h"
#include "versebias/sentiment.h"

namespace versebias::synthetic {

class VerseMaker {
 public:
  explicit VerseMaker(uint64_t seed) : rng_(seed) {}

  // A verse with the given polarity about `subject` (e.g. "the women",
  // "she") located at `place` (a noun).
  std::string Make(SentimentLabel label, const std::string& subject,
                   const std::string& place);
  std::string RandomPlace();
  std::string RandomNounSubject();
  SentimentLabel Draw(const std::array<double, 3>& class_probs);
  UniformStream& rng() { return rng_; }

 private:
  UniformStream rng_;
};

// Labeled verses with roughly the released dataset's class balance
// (about 18% negative, 66% no impact, 16% positive), split 80/10/10 per
// class.
std::vector<LabeledVerse> SentimentDataset(int n, uint64_t seed);

struct PoemCorpusConfig {
  int poems = 150;
  int min_verses = 5;
  int max_verses = 9;
  // Share of poems about a demographic group; those mention the group in
  // each verse with probability group_mention_rate.
  double demographic_poems = 0.4;
  double group_mention_rate = 0.7;
  // Class distribution (negative, no_impact, positive) of a next verse,
  // conditioned on whether its input verse mentions a demographic group.
  std::array<double, 3> after_demographic = {0.25, 0.62, 0.13};
  std::array<double, 3> elsewhere = {0.13, 0.62, 0.25};
  // Share of subject slots filled with a gendered pronoun.
  double pronoun_rate = 0.15;
  uint64_t seed = 1;
};

// Poems whose next-verse sentiment depends on demographic mentions in the
// input verse at the configured rates.
LoadedCorpus PoemCorpus(const PoemCorpusConfig& config,
                        const MentionLexicon& lexicon);

// (input, next) verse pairs whose members share a place noun.
std::vector<std::pair<std::string, std::string>> TopicPairs(int n,
                                                            uint64_t seed);

}  // namespace versebias::synthetic

#endif  // VERSEBIAS_SYNTHETIC_H_
