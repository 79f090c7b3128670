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

#include "versebias/augment.h"

#include <stdexcept>
#include <unordered_set>

#include "versebias/text.h"

namespace versebias {

std::string_view ProvenanceName(Provenance p) {
  switch (p) {
    case Provenance::kOriginal:
      return "original";
    case Provenance::kScenario1:
      return "scenario1";
    case Provenance::kScenario2:
      return "scenario2";
  }
  return "?";
}

Provenance ParseProvenance(std::string_view name) {
  if (name == "original") return Provenance::kOriginal;
  if (name == "scenario1") return Provenance::kScenario1;
  if (name == "scenario2") return Provenance::kScenario2;
  throw std::invalid_argument("unknown provenance: " + std::string(name));
}

nlohmann::json ExampleToJson(const TrainingExample& e) {
  nlohmann::json negs = nlohmann::json::array();
  for (const auto& v : e.hard_negatives) negs.push_back(VerseToJson(v));
  return {{"input", VerseToJson(e.input)},
          {"positive", VerseToJson(e.positive)},
          {"hard_negatives", std::move(negs)},
          {"provenance", ProvenanceName(e.provenance)}};
}

TrainingExample ExampleFromJson(const nlohmann::json& j) {
  TrainingExample e;
  e.input = VerseFromJson(j.at("input"));
  e.positive = VerseFromJson(j.at("positive"));
  for (const auto& v : j.at("hard_negatives")) {
    e.hard_negatives.push_back(VerseFromJson(v));
  }
  e.provenance = ParseProvenance(j.at("provenance").get<std::string>());
  return e;
}

TrainingExample OriginalExample(const VersePair& pair) {
  return {pair.input, pair.next, {}, Provenance::kOriginal};
}

nlohmann::json AugmentConfig::ToJson() const {
  return {{"scenario2_probability", scenario2_probability}, {"seed", seed}};
}

AugmentConfig AugmentConfig::FromJson(const nlohmann::json& j) {
  AugmentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "scenario2_probability") {
      c.scenario2_probability = value.get<double>();
    } else if (key == "seed") {
      c.seed = value.get<uint64_t>();
    } else {
      throw std::invalid_argument("unknown augment config key: " + key);
    }
  }
  if (!(c.scenario2_probability >= 0 && c.scenario2_probability <= 1)) {
    throw std::invalid_argument("scenario2_probability must be in [0, 1]");
  }
  return c;
}

Eligibility Classify(bool has_demographic_mention, SentimentLabel next_label) {
  if (next_label != SentimentLabel::kNegative) return Eligibility::kNone;
  return has_demographic_mention ? Eligibility::kScenario1
                                 : Eligibility::kScenario2;
}

AugmentOutcome AugmentPair(const VersePair& pair, const AugmentationDeps& deps,
                           const AugmentConfig& config, UniformStream& rng) {
  AugmentOutcome out;
  out.example = OriginalExample(pair);
  out.has_demographic_mention =
      HasDemographicMention(pair.input.text, *deps.lexicon);
  out.next_label = deps.sentiment->Predict(pair.next.text);
  out.eligibility = Classify(out.has_demographic_mention, out.next_label);
  switch (out.eligibility) {
    case Eligibility::kNone:
      return out;
    case Eligibility::kScenario1:
      out.drew_transfer = true;
      break;
    case Eligibility::kScenario2:
      out.drew_transfer = rng.Next() < config.scenario2_probability;
      break;
  }
  if (!out.drew_transfer) return out;
  std::optional<Verse> rewritten = deps.rewrite(pair.next);
  if (!rewritten || MatchKey(rewritten->text) == MatchKey(pair.next.text)) {
    out.no_op = true;
    return out;
  }
  out.example.positive = std::move(*rewritten);
  out.example.hard_negatives = {pair.next};
  out.example.provenance = out.eligibility == Eligibility::kScenario1
                               ? Provenance::kScenario1
                               : Provenance::kScenario2;
  return out;
}

nlohmann::json AugmentationReport::ToJson() const {
  return {{"pairs", pairs},
          {"original", original},
          {"scenario1", scenario1},
          {"scenario2", scenario2},
          {"scenario1_eligible", scenario1_eligible},
          {"scenario2_eligible", scenario2_eligible},
          {"scenario2_drawn", scenario2_drawn},
          {"scenario1_noop", scenario1_noop},
          {"scenario2_noop", scenario2_noop},
          {"cells", cells.ToJson()}};
}

AugmentedCorpus AugmentCorpus(std::span<const VersePair> pairs,
                              const AugmentationDeps& deps,
                              const AugmentConfig& config) {
  AugmentedCorpus out;
  UniformStream rng(config.seed);
  auto& r = out.report;
  out.examples.reserve(pairs.size());
  for (const auto& pair : pairs) {
    AugmentOutcome o = AugmentPair(pair, deps, config, rng);
    ++r.pairs;
    ++r.cells.counts[o.has_demographic_mention ? 0 : 1]
                    [ClassIndex(o.next_label)];
    if (o.eligibility == Eligibility::kScenario1) {
      ++r.scenario1_eligible;
      if (o.no_op) ++r.scenario1_noop;
    } else if (o.eligibility == Eligibility::kScenario2) {
      ++r.scenario2_eligible;
      if (o.drew_transfer) ++r.scenario2_drawn;
      if (o.no_op) ++r.scenario2_noop;
    }
    switch (o.example.provenance) {
      case Provenance::kOriginal:
        ++r.original;
        break;
      case Provenance::kScenario1:
        ++r.scenario1;
        break;
      case Provenance::kScenario2:
        ++r.scenario2;
        break;
    }
    out.examples.push_back(std::move(o.example));
  }
  return out;
}

std::vector<Verse> BuildCandidatePool(std::span<const Verse> verses,
                                      const PronounMap& map) {
  std::vector<Verse> pool;
  std::unordered_set<std::string> seen;
  auto add = [&](Verse v) {
    if (seen.insert(MatchKey(v.text)).second) pool.push_back(std::move(v));
  };
  for (const auto& v : verses) {
    add(v);
    Verse swapped = SwapGenderPronouns(v, map);
    if (swapped.text != v.text) add(std::move(swapped));
  }
  return pool;
}

}  // namespace versebias
