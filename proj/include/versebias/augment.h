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

// Style-transfer data augmentation for next-verse training pairs.
//
// Pairs whose next verse is negative are rewritten to a positive next verse,
// and the original next verse becomes an explicit negative for that input:
//   scenario 1: input mentions a demographic group -> always rewritten;
//   scenario 2: no demographic mention -> rewritten with a fixed probability.
// Every other pair passes through unchanged.

#ifndef VERSEBIAS_AUGMENT_H_
#define VERSEBIAS_AUGMENT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "versebias/corpus.h"
#include "versebias/random.h"
#include "versebias/sentiment.h"

namespace versebias {

enum class Provenance { kOriginal, kScenario1, kScenario2 };
std::string_view ProvenanceName(Provenance p);
Provenance ParseProvenance(std::string_view name);

struct TrainingExample {
  Verse input;
  Verse positive;
  std::vector<Verse> hard_negatives;
  Provenance provenance = Provenance::kOriginal;

  bool operator==(const TrainingExample&) const = default;
};

nlohmann::json ExampleToJson(const TrainingExample& e);
TrainingExample ExampleFromJson(const nlohmann::json& j);

// Plain (input, next) example with no hard negatives.
TrainingExample OriginalExample(const VersePair& pair);

struct AugmentConfig {
  double scenario2_probability = 0.5;
  uint64_t seed = 1234;

  nlohmann::json ToJson() const;
  static AugmentConfig FromJson(const nlohmann::json& j);
};

// Which rule a pair falls under, before any random draw.
enum class Eligibility { kNone, kScenario1, kScenario2 };
Eligibility Classify(bool has_demographic_mention, SentimentLabel next_label);

// Positive-style rewrite of a verse; nullopt signals a no-op transfer.
using PositiveRewriter = std::function<std::optional<Verse>(const Verse&)>;

struct AugmentationDeps {
  const SentimentModel* sentiment = nullptr;
  const MentionLexicon* lexicon = nullptr;
  PositiveRewriter rewrite;
};

struct AugmentOutcome {
  TrainingExample example;
  Eligibility eligibility = Eligibility::kNone;
  bool has_demographic_mention = false;
  SentimentLabel next_label = SentimentLabel::kNoImpact;
  bool drew_transfer = false;  // scenario 1, or scenario 2 with a hit
  bool no_op = false;          // transfer attempted but rewrite was a no-op
};

// Applies the scenario rules to one pair. A uniform draw is consumed from
// `rng` only for scenario-2 pairs.
AugmentOutcome AugmentPair(const VersePair& pair, const AugmentationDeps& deps,
                           const AugmentConfig& config, UniformStream& rng);

struct AugmentationReport {
  long pairs = 0;
  long original = 0;
  long scenario1 = 0;
  long scenario2 = 0;
  long scenario1_eligible = 0;
  long scenario2_eligible = 0;
  long scenario2_drawn = 0;
  long scenario1_noop = 0;
  long scenario2_noop = 0;
  CorpusStats cells;

  nlohmann::json ToJson() const;
};

struct AugmentedCorpus {
  std::vector<TrainingExample> examples;
  AugmentationReport report;
};

// One example per pair, in pair order; the draw stream is seeded from
// config.seed and consumed per scenario-2 pair in corpus order.
AugmentedCorpus AugmentCorpus(std::span<const VersePair> pairs,
                              const AugmentationDeps& deps,
                              const AugmentConfig& config);

// Original verses plus every pronoun-swapped variant that differs from its
// source, deduplicated by normalized lowercase text. Each variant follows its
// source.
std::vector<Verse> BuildCandidatePool(std::span<const Verse> verses,
                                      const PronounMap& map);

}  // namespace versebias

#endif  // VERSEBIAS_AUGMENT_H_
