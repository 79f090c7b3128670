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

// Delete, retrieve, generate sentiment style transfer.
//
// Attribute markers are n-grams whose smoothed frequency ratio between the
// two style corpora exceeds a threshold:
//
//   salience_s(u) = (count_s(u) + lambda) / (count_other(u) + lambda)
//
// A verse is split into content (markers removed, greedy leftmost-longest)
// and markers. A marker of the opposite style is retrieved from the pool
// element whose content is most similar (TF-IDF cosine over content
// unigrams) and spliced in where the first marker was deleted.

#ifndef VERSEBIAS_STYLETRANSFER_H_
#define VERSEBIAS_STYLETRANSFER_H_

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "versebias/corpus.h"

namespace versebias {

enum class Style { kNegative, kPositive };
std::string_view StyleName(Style style);
inline Style Opposite(Style s) {
  return s == Style::kNegative ? Style::kPositive : Style::kNegative;
}

using Tokens = std::vector<std::string>;

struct TransferConfig {
  int n_max = 4;
  double smoothing = 1.0;  // lambda
  double threshold = 10.0;  // gamma

  void Validate() const;
  nlohmann::json ToJson() const;
  static TransferConfig FromJson(const nlohmann::json& j);
};

struct SalienceEntry {
  long count_negative = 0;
  long count_positive = 0;
  double salience_negative = 0.0;
  double salience_positive = 0.0;

  double Salience(Style s) const {
    return s == Style::kNegative ? salience_negative : salience_positive;
  }
};

class SalienceTable {
 public:
  SalienceTable() = default;

  // Every n-gram (n <= n_max) occurring in either corpus, with occurrence
  // counts per style. Throws std::invalid_argument if a corpus is empty.
  static SalienceTable Compute(std::span<const Tokens> negative,
                               std::span<const Tokens> positive,
                               const TransferConfig& config);

  const SalienceEntry* Find(std::string_view ngram) const;
  size_t size() const { return entries_.size(); }
  const TransferConfig& config() const { return config_; }
  const std::unordered_map<std::string, SalienceEntry>& entries() const {
    return entries_;
  }

  // "ngram<TAB>count_neg<TAB>count_pos<TAB>sal_neg<TAB>sal_pos" lines sorted
  // by ngram, preceded by a "#" config header line.
  std::string ExportTsv() const;
  static SalienceTable ImportTsv(std::string_view contents);

 private:
  TransferConfig config_;
  std::unordered_map<std::string, SalienceEntry> entries_;
};

struct Marker {
  Tokens ngram;
  int start = 0;  // offset in the original token list

  bool operator==(const Marker&) const = default;
};

struct MarkedVerse {
  Tokens original;
  Tokens content;
  std::vector<Marker> markers;
  Style source_style = Style::kNegative;
};

struct AttributeMarker {
  Tokens tokens;
  Style style = Style::kPositive;
  Tokens source_context;
};

// Thrown when retrieval has nothing to draw from.
class NoTransferableAttribute : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Removes non-overlapping n-grams with salience for source_style above the
// threshold, scanning left to right and preferring the longest n-gram at each
// position.
MarkedVerse DeleteMarkers(std::span<const std::string> tokens,
                          const SalienceTable& table, Style source_style);

// Re-inserts markers at their recorded offsets; inverse of DeleteMarkers.
Tokens Reconstruct(const MarkedVerse& marked);

// Pool of marked verses of one style, indexed for TF-IDF retrieval. Elements
// without markers are dropped at construction.
class MarkerPool {
 public:
  MarkerPool() = default;
  explicit MarkerPool(std::vector<MarkedVerse> elements);

  // Marker of the element whose content has maximal TF-IDF cosine similarity
  // to `query`'s content; ties go to the lexicographically smaller content,
  // then marker. The element's first marker is returned. Throws
  // NoTransferableAttribute when the pool is empty.
  AttributeMarker Retrieve(const MarkedVerse& query) const;

  // Cosine similarity between query content and element i (for tests).
  double Similarity(const MarkedVerse& query, size_t i) const;

  size_t size() const { return elements_.size(); }
  const std::vector<MarkedVerse>& elements() const { return elements_; }
  bool empty() const { return elements_.empty(); }

 private:
  using SparseVector = std::vector<std::pair<int, double>>;  // sorted by term
  SparseVector QueryVector(std::span<const std::string> content) const;

  std::vector<MarkedVerse> elements_;
  std::vector<std::string> content_keys_;
  std::unordered_map<std::string, int> term_ids_;
  std::vector<double> idf_;
  std::vector<SparseVector> vectors_;  // L2-normalized
  // term -> (element, weight)
  std::vector<std::vector<std::pair<int, double>>> postings_;
};

// Template generation: attribute tokens inserted at the first deletion
// offset, or appended when nothing was deleted.
Tokens GenerateStyled(const MarkedVerse& marked, const AttributeMarker& attr);

struct TransferResult {
  Verse verse;
  bool no_op = false;
  MarkedVerse marked;
  AttributeMarker attribute;
};

// Delete, retrieve and generate a target-style version of a verse. Tokens
// are lowercase word tokens; the output text is detokenized. When no marker
// of the source style is found the verse is returned unchanged with
// no_op = true.
class StyleTransfer {
 public:
  StyleTransfer(SalienceTable table, MarkerPool target_pool, Style source,
                Style target);

  // Splits verses into style corpora with `model` (no_impact dropped), builds
  // the salience table and the target-style marker pool.
  static StyleTransfer Build(std::span<const std::string> verses,
                             const SentimentModel& model,
                             const TransferConfig& config,
                             Style source = Style::kNegative);

  TransferResult Transfer(const Verse& verse) const;

  const SalienceTable& table() const { return table_; }
  const MarkerPool& pool() const { return pool_; }

 private:
  SalienceTable table_;
  MarkerPool pool_;
  Style source_;
  Style target_;
};

// Convenience wrapper for the negative-to-positive direction.
TransferResult ToPositive(const Verse& verse, const SalienceTable& table,
                          const MarkerPool& positive_pool);

}  // namespace versebias

#endif  // VERSEBIAS_STYLETRANSFER_H_
