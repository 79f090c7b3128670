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
// Verse sentiment: the five-way annotation label set, the agreement filter
// applied to two-annotator data, dataset loading with a configurable label
// encoding, and a multinomial logistic-regression classifier over word
// n-gram presence features.

#ifndef VERSEBIAS_SENTIMENT_H_
#define VERSEBIAS_SENTIMENT_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace versebias {

enum class SentimentLabel { kNegative, kNoImpact, kPositive, kMixed, kNonsense };

inline constexpr int kNumPolarityClasses = 3;

std::string_view LabelName(SentimentLabel label);
std::optional<SentimentLabel> ParseLabelName(std::string_view name);

// True for the three labels that carry a numeric value.
bool IsPolarity(SentimentLabel label);

// negative = -1, no_impact = 0, positive = +1. Throws std::invalid_argument
// for mixed and nonsense.
int NumericScore(SentimentLabel label);

// Class index in [0, 3) for polarity labels, in tie-break order.
int ClassIndex(SentimentLabel label);
SentimentLabel LabelFromClassIndex(int index);

enum class Split { kTrain, kDev, kTest };
std::string_view SplitName(Split split);

struct AnnotatedVerse {
  std::string text;
  SentimentLabel label_a = SentimentLabel::kNoImpact;
  SentimentLabel label_b = SentimentLabel::kNoImpact;
};

struct LabeledVerse {
  std::string text;
  SentimentLabel label = SentimentLabel::kNoImpact;
  Split split = Split::kTrain;
};

// Keeps a sample only when both annotators agree on one of the three
// polarity labels.
std::optional<LabeledVerse> ResolveAnnotations(const AnnotatedVerse& verse,
                                               Split split = Split::kTrain);

struct DatasetStats {
  // counts[split][class index]
  std::array<std::array<int, kNumPolarityClasses>, 3> counts{};

  int At(Split split, SentimentLabel label) const;
  int SplitTotal(Split split) const;
  int Total() const;
  std::string ToTable() const;
};

DatasetStats ComputeDatasetStats(std::span<const LabeledVerse> dataset);

// Maps raw label values found in dataset files ("-1", "0", "2", ...) to
// labels. Loaded from a JSON object {"<raw>": "<label name>", ...}.
class LabelMap {
 public:
  LabelMap() = default;
  explicit LabelMap(std::map<std::string, SentimentLabel> mapping);

  // -1/0/1/2 encoding: negative, no_impact, positive, mixed.
  static LabelMap Default();
  static LabelMap FromJson(const nlohmann::json& j);
  static LabelMap LoadFile(const std::filesystem::path& path);

  // Throws std::invalid_argument for raw values with no mapping.
  SentimentLabel Map(std::string_view raw) const;

 private:
  std::map<std::string, SentimentLabel, std::less<>> mapping_;
};

struct LoadedDataset {
  std::vector<LabeledVerse> verses;
  // Rows whose label is mixed/nonsense, or annotator disagreements.
  int excluded = 0;
  bool had_splits = true;
};

// Parses "id<TAB>verse_text<TAB>label" lines. Blank lines are ignored;
// malformed lines throw std::invalid_argument naming the line.
LoadedDataset ParseLabeledTsv(std::string_view contents, Split split,
                              const LabelMap& labels);

// Parses "id<TAB>text<TAB>label_a<TAB>label_b" and applies
// ResolveAnnotations. Every kept row gets split kTrain; use StratifiedSplit
// afterwards.
LoadedDataset ParseAnnotationTsv(std::string_view contents,
                                 const LabelMap& labels);

// Reassigns splits 80/10/10 per label with a seeded shuffle.
void StratifiedSplit(std::vector<LabeledVerse>& verses, uint64_t seed);

// Loads train.tsv / dev.tsv / test.tsv from a directory (validation.tsv is
// accepted for dev). A directory holding a single data.tsv, or a path to one
// file, is split with StratifiedSplit.
LoadedDataset LoadSentimentDataset(const std::filesystem::path& path,
                                   const LabelMap& labels, uint64_t seed);

struct SentimentConfig {
  int max_ngram = 2;
  double l2 = 1e-4;
  int epochs = 300;
  double learning_rate = 2.0;
  uint64_t seed = 17;

  nlohmann::json ToJson() const;
  static SentimentConfig FromJson(const nlohmann::json& j);
};

struct Classification {
  SentimentLabel label = SentimentLabel::kNoImpact;
  std::array<double, kNumPolarityClasses> probabilities{};
};

struct SentimentTrainReport {
  std::vector<double> dev_accuracy;  // one per epoch
  int best_epoch = 0;
  double best_dev_accuracy = 0.0;
  double train_accuracy = 0.0;
};

class SentimentModel {
 public:
  SentimentModel() = default;

  // Full-batch gradient descent on L2-regularized cross-entropy. The weights
  // from the epoch with the best dev accuracy (earliest on ties) are kept;
  // with an empty dev set the final epoch is kept. Throws
  // std::invalid_argument if a polarity class is missing from train.
  static SentimentModel Train(std::span<const LabeledVerse> train,
                              std::span<const LabeledVerse> dev,
                              const SentimentConfig& config,
                              SentimentTrainReport* report = nullptr);

  // Empty input (no tokens) yields no_impact with uniform probabilities.
  Classification Classify(std::string_view text) const;
  SentimentLabel Predict(std::string_view text) const {
    return Classify(text).label;
  }

  // Distinct n-gram features of a text (before vocabulary lookup).
  std::vector<std::string> ExtractFeatures(std::string_view text) const;

  const SentimentConfig& config() const { return config_; }
  size_t num_features() const { return features_.size(); }
  const std::array<double, kNumPolarityClasses>& bias() const { return bias_; }
  const std::vector<std::array<double, kNumPolarityClasses>>& weights() const {
    return weights_;
  }

  nlohmann::json ToJson() const;
  static SentimentModel FromJson(const nlohmann::json& j);
  void Save(const std::filesystem::path& path) const;
  static SentimentModel Load(const std::filesystem::path& path);

 private:
  std::vector<int> FeatureIds(std::string_view text) const;
  std::array<double, kNumPolarityClasses> Scores(
      std::span<const int> ids) const;

  SentimentConfig config_;
  std::vector<std::string> features_;  // sorted
  std::unordered_map<std::string, int> feature_index_;
  std::vector<std::array<double, kNumPolarityClasses>> weights_;
  std::array<double, kNumPolarityClasses> bias_{};
};

double Accuracy(const SentimentModel& model,
                std::span<const LabeledVerse> dataset);

// Stable softmax with max subtraction.
std::array<double, kNumPolarityClasses> Softmax3(
    const std::array<double, kNumPolarityClasses>& scores);

// First index of the maximum (negative < no_impact < positive on ties).
int ArgMax3(const std::array<double, kNumPolarityClasses>& scores);

}  // namespace versebias

#endif  // VERSEBIAS_SENTIMENT_H_
