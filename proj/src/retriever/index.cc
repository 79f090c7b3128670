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


#include "versebias/retriever/index.h"

#include <algorithm>
#include <cstring>
#include <numeric>

#include <nlohmann/json.hpp>

#include "versebias/hash.h"

namespace versebias::retriever {

namespace {
constexpr std::string_view kIndexMagic = "versebias-index 1";
}  // namespace

RowVector<float> Retriever::Embed(Tower tower, std::string_view text) const {
  return Encode(params, tower, vocab.Encode(text));
}

VerseIndex VerseIndex::Build(std::vector<std::string> verses,
                             const Retriever& retriever) {
  if (verses.empty()) throw std::invalid_argument("index pool is empty");
  VerseIndex index;
  const int dim = retriever.params.config().embedding_dim;
  index.embeddings_.resize(static_cast<Eigen::Index>(verses.size()), dim);
  for (size_t i = 0; i < verses.size(); ++i) {
    index.embeddings_.row(i) = retriever.Embed(Tower::kResponse, verses[i]);
  }
  index.verses_ = std::move(verses);
  index.checkpoint_hash_ = retriever.params.Hash();
  return index;
}

std::vector<Suggestion> VerseIndex::Rank(const RowVector<float>& query, int n,
                                         int offset) const {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (offset < 0) throw std::invalid_argument("offset must be >= 0");
  if (query.size() != embeddings_.cols()) {
    throw std::invalid_argument("query dimension does not match the index");
  }
  RowVector<float> scores = query * embeddings_.transpose();
  std::vector<int> order(verses_.size());
  std::iota(order.begin(), order.end(), 0);
  const size_t end = std::min(order.size(), static_cast<size_t>(offset) + n);
  auto better = [&](int a, int b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + end, order.end(), better);
  std::vector<Suggestion> out;
  for (size_t r = static_cast<size_t>(offset); r < end; ++r) {
    int i = order[r];
    out.push_back({static_cast<int>(r), i, verses_[i], scores[i]});
  }
  return out;
}

std::vector<Suggestion> VerseIndex::Suggest(const Retriever& retriever,
                                            std::string_view input, int n,
                                            int offset) const {
  if (retriever.params.Hash() != checkpoint_hash_) {
    throw StaleIndex("index was built from checkpoint " + checkpoint_hash_ +
                     " but the loaded parameters hash to " +
                     retriever.params.Hash());
  }
  return Rank(retriever.Embed(Tower::kInput, input), n, offset);
}

std::string VerseIndex::Serialize() const {
  nlohmann::json header = {{"checkpoint_hash", checkpoint_hash_},
                           {"dim", embeddings_.cols()},
                           {"verses", verses_}};
  std::string out = std::string(kIndexMagic) + "\n" + header.dump() + "\n";
  out.append(reinterpret_cast<const char*>(embeddings_.data()),
             sizeof(float) * embeddings_.size());
  return out;
}

VerseIndex VerseIndex::Deserialize(std::string_view bytes) {
  size_t first = bytes.find('\n');
  if (first == std::string_view::npos || bytes.substr(0, first) != kIndexMagic) {
    throw std::invalid_argument("not a versebias index");
  }
  size_t second = bytes.find('\n', first + 1);
  if (second == std::string_view::npos) {
    throw std::invalid_argument("index header is truncated");
  }
  auto header = nlohmann::json::parse(bytes.substr(first + 1, second - first - 1));
  VerseIndex index;
  index.checkpoint_hash_ = header.at("checkpoint_hash").get<std::string>();
  index.verses_ = header.at("verses").get<std::vector<std::string>>();
  const auto dim = header.at("dim").get<Eigen::Index>();
  index.embeddings_.resize(static_cast<Eigen::Index>(index.verses_.size()), dim);
  const size_t n = sizeof(float) * index.embeddings_.size();
  if (bytes.size() - (second + 1) != n) {
    throw std::invalid_argument("index embedding data has the wrong size");
  }
  std::memcpy(index.embeddings_.data(), bytes.data() + second + 1, n);
  return index;
}

void VerseIndex::Save(const std::filesystem::path& path) const {
  WriteFile(path, Serialize());
}

VerseIndex VerseIndex::Load(const std::filesystem::path& path) {
  return Deserialize(ReadFile(path));
}

}  // namespace versebias::retriever
