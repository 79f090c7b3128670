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


// Trained retriever bundle and the embedded suggestion pool.

#ifndef VERSEBIAS_RETRIEVER_INDEX_H_
#define VERSEBIAS_RETRIEVER_INDEX_H_

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "versebias/retriever/model.h"
#include "versebias/tokenizer.h"

namespace versebias::retriever {

// Tokenizer plus float parameters; immutable once loaded.
struct Retriever {
  SubwordVocab vocab;
  ModelParams<float> params;

  RowVector<float> Embed(Tower tower, std::string_view text) const;
};

// Raised when an index is queried with parameters other than the ones that
// built it.
class StaleIndex : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Suggestion {
  int rank = 0;   // 0-based position in the full ranking
  int index = 0;  // pool position
  std::string verse;
  double score = 0.0;
};

class VerseIndex {
 public:
  VerseIndex() = default;

  // Embeds every verse with the response tower. Throws std::invalid_argument
  // on an empty pool.
  static VerseIndex Build(std::vector<std::string> verses,
                          const Retriever& retriever);

  // Ranks the pool by dot product with `query`, highest first, ties by pool
  // position, and returns ranks [offset, offset + n). Throws
  // std::invalid_argument when n < 1 or offset < 0.
  std::vector<Suggestion> Rank(const RowVector<float>& query, int n,
                               int offset = 0) const;

  // Encodes `input` with the input tower and ranks the pool. Throws
  // StaleIndex when the retriever's parameters did not build this index.
  std::vector<Suggestion> Suggest(const Retriever& retriever,
                                  std::string_view input, int n,
                                  int offset = 0) const;

  size_t size() const { return verses_.size(); }
  const std::vector<std::string>& verses() const { return verses_; }
  const Matrix<float>& embeddings() const { return embeddings_; }
  const std::string& checkpoint_hash() const { return checkpoint_hash_; }

  // "versebias-index 1" line, a JSON header line (checkpoint hash, dim,
  // verses), then the little-endian embedding matrix.
  std::string Serialize() const;
  static VerseIndex Deserialize(std::string_view bytes);
  void Save(const std::filesystem::path& path) const;
  static VerseIndex Load(const std::filesystem::path& path);

 private:
  std::vector<std::string> verses_;
  Matrix<float> embeddings_;
  std::string checkpoint_hash_;
};

}  // namespace versebias::retriever

#endif  // VERSEBIAS_RETRIEVER_INDEX_H_
