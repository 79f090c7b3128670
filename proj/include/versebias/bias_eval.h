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


// Prompt-based bias evaluation of a retriever: "The <group>" prompts, the
// sentiment of their top-k suggestions, and baseline/augmented comparison.

#ifndef VERSEBIAS_BIAS_EVAL_H_
#define VERSEBIAS_BIAS_EVAL_H_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "versebias/corpus.h"
#include "versebias/retriever/index.h"
#include "versebias/sentiment.h"

namespace versebias {

struct Prompt {
  std::string text;  // "The men"
  std::string group;
  MentionList list = MentionList::kDemographic;
  bool operator==(const Prompt&) const = default;
};

// Singular then plural prompt for every group, demographic groups first.
std::vector<Prompt> BuildPrompts(const MentionLexicon& lexicon);

struct ScoredVerse {
  std::string verse;
  SentimentLabel label = SentimentLabel::kNoImpact;
  int score = 0;  // -1, 0 or +1
};

struct PromptResult {
  Prompt prompt;
  std::vector<ScoredVerse> verses;
  double Mean() const;
};

struct ListSummary {
  long count = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // population
  std::map<std::string, double> group_means;
};

struct BiasReport {
  std::string model_tag;
  int k = 0;
  std::vector<PromptResult> prompts;

  // Recomputed from the per-verse scores on every call.
  ListSummary Summary(MentionList list) const;

  nlohmann::json ToJson() const;
  static BiasReport FromJson(const nlohmann::json& j);
};

// Top-k suggestions for a prompt, best first.
using SuggestFn =
    std::function<std::vector<std::string>(const std::string& prompt, int k)>;
using LabelFn = std::function<SentimentLabel(const std::string& verse)>;

// Throws std::invalid_argument when k < 1.
BiasReport EvaluateModel(const std::string& model_tag,
                         const std::vector<Prompt>& prompts, int k,
                         const SuggestFn& suggest, const LabelFn& label);

// Suggestions from `index`; each pool verse is classified at most once.
BiasReport EvaluateModel(const std::string& model_tag,
                         const retriever::VerseIndex& index,
                         const retriever::Retriever& retriever,
                         const std::vector<Prompt>& prompts, int k,
                         const SentimentModel& sentiment);

struct ListDelta {
  ListSummary baseline;
  ListSummary augmented;
  double delta_mean = 0.0;
  double delta_std = 0.0;
};

struct PromptDelta {
  Prompt prompt;
  double baseline_mean = 0.0;
  double augmented_mean = 0.0;
  double delta = 0.0;
};

struct BiasComparison {
  std::string baseline_tag;
  std::string augmented_tag;
  int k = 0;
  ListDelta demographic;
  ListDelta other;
  std::vector<PromptDelta> prompts;

  const ListDelta& list(MentionList l) const {
    return l == MentionList::kDemographic ? demographic : other;
  }
  nlohmann::json ToJson() const;
  // Fixed-width table: one row per list, mean and std for both models plus
  // the deltas.
  std::string ToTable() const;
};

// Augmented minus baseline. Throws std::invalid_argument when the reports
// differ in k or in their prompt lists.
BiasComparison Compare(const BiasReport& baseline, const BiasReport& augmented);

}  // namespace versebias

#endif  // VERSEBIAS_BIAS_EVAL_H_
