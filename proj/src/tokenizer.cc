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

#include "versebias/tokenizer.h"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "versebias/hash.h"
#include "versebias/text.h"

namespace versebias {

namespace {

constexpr std::string_view kMagic = "versebias-bpe 1";

unsigned long long PairKey(int left, int right) {
  return (static_cast<unsigned long long>(left) << 32) |
         static_cast<unsigned int>(right);
}

std::string ToHex(std::string_view bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 0xf]);
  }
  return out;
}

void MergeInPlace(std::vector<int>& ids, int left, int right, int merged) {
  size_t w = 0;
  for (size_t r = 0; r < ids.size();) {
    if (r + 1 < ids.size() && ids[r] == left && ids[r + 1] == right) {
      ids[w++] = merged;
      r += 2;
    } else {
      ids[w++] = ids[r++];
    }
  }
  ids.resize(w);
}

}  // namespace

SubwordVocab::SubwordVocab() {
  pieces_ = {"<pad>", "<unk>", "<s>", "</s>"};
  for (int b = 0; b < 256; ++b) pieces_.emplace_back(1, static_cast<char>(b));
}

std::vector<std::string> SubwordVocab::Chunks(std::string_view text) {
  std::string norm = NormalizeWhitespace(text);
  std::vector<std::string> chunks;
  size_t start = 0;
  while (start < norm.size()) {
    size_t space = norm.find(' ', start + 1);
    if (space == std::string::npos) space = norm.size();
    chunks.push_back(norm.substr(start, space - start));
    start = space;
  }
  return chunks;
}

void SubwordVocab::AddMerge(int left, int right) {
  int id = static_cast<int>(pieces_.size());
  pieces_.push_back(pieces_[left] + pieces_[right]);
  merges_.emplace_back(left, right);
  auto key = PairKey(left, right);
  auto it = std::lower_bound(
      rank_sorted_.begin(), rank_sorted_.end(), key,
      [](const auto& e, unsigned long long k) { return e.first < k; });
  rank_sorted_.insert(it, {key, id - kBaseSize});
}

int SubwordVocab::Rank(int left, int right) const {
  auto key = PairKey(left, right);
  auto it = std::lower_bound(
      rank_sorted_.begin(), rank_sorted_.end(), key,
      [](const auto& e, unsigned long long k) { return e.first < k; });
  if (it == rank_sorted_.end() || it->first != key) return -1;
  return it->second;
}

SubwordVocab SubwordVocab::Train(std::span<const std::string> corpus,
                                 int target_size) {
  if (corpus.empty()) throw std::invalid_argument("tokenizer corpus is empty");
  if (target_size <= kBaseSize) {
    throw std::invalid_argument("target_size must exceed the base alphabet (" +
                                std::to_string(kBaseSize) + ")");
  }
  SubwordVocab vocab;
  std::map<std::string, long> chunk_counts;
  for (const auto& line : corpus) {
    for (auto& c : Chunks(line)) ++chunk_counts[c];
  }
  std::vector<std::vector<int>> words;
  std::vector<long> freq;
  for (const auto& [chunk, count] : chunk_counts) {
    std::vector<int> ids;
    for (unsigned char b : chunk) ids.push_back(ByteId(b));
    words.push_back(std::move(ids));
    freq.push_back(count);
  }

  std::unordered_map<unsigned long long, long> pair_counts;
  while (vocab.size() < target_size) {
    pair_counts.clear();
    for (size_t w = 0; w < words.size(); ++w) {
      const auto& ids = words[w];
      for (size_t i = 0; i + 1 < ids.size(); ++i) {
        pair_counts[PairKey(ids[i], ids[i + 1])] += freq[w];
      }
    }
    long best_count = 1;
    int best_left = -1, best_right = -1;
    for (const auto& [key, count] : pair_counts) {
      int left = static_cast<int>(key >> 32);
      int right = static_cast<int>(key & 0xffffffffu);
      if (count < best_count) continue;
      if (count > best_count || best_left < 0) {
        best_count = count;
        best_left = left;
        best_right = right;
        continue;
      }
      const auto& a = vocab.pieces_;
      if (std::tie(a[left], a[right]) < std::tie(a[best_left], a[best_right])) {
        best_left = left;
        best_right = right;
      }
    }
    if (best_left < 0 || best_count < 2) break;
    int merged = vocab.size();
    vocab.AddMerge(best_left, best_right);
    for (auto& ids : words) MergeInPlace(ids, best_left, best_right, merged);
  }
  return vocab;
}

void SubwordVocab::EncodeChunk(std::string_view chunk,
                               std::vector<int>& out) const {
  std::vector<int> ids;
  ids.reserve(chunk.size());
  for (unsigned char b : chunk) ids.push_back(ByteId(b));
  while (ids.size() > 1) {
    int best_rank = std::numeric_limits<int>::max();
    size_t best_pos = 0;
    for (size_t i = 0; i + 1 < ids.size(); ++i) {
      int r = Rank(ids[i], ids[i + 1]);
      if (r >= 0 && r < best_rank) {
        best_rank = r;
        best_pos = i;
      }
    }
    if (best_rank == std::numeric_limits<int>::max()) break;
    MergeInPlace(ids, ids[best_pos], ids[best_pos + 1], kBaseSize + best_rank);
  }
  out.insert(out.end(), ids.begin(), ids.end());
}

std::vector<int> SubwordVocab::Encode(std::string_view text) const {
  std::vector<int> out = {kBos};
  for (const auto& chunk : Chunks(text)) EncodeChunk(chunk, out);
  out.push_back(kEos);
  return out;
}

std::string SubwordVocab::Decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || id >= size()) {
      throw std::out_of_range("token id " + std::to_string(id) +
                              " outside vocabulary of size " +
                              std::to_string(size()));
    }
    if (id == kPad || id == kBos || id == kEos) continue;
    if (id == kUnk) {
      out += "\xEF\xBF\xBD";
      continue;
    }
    out += pieces_[id];
  }
  return out;
}

std::string SubwordVocab::Serialize() const {
  std::ostringstream out;
  out << kMagic << "\n";
  out << "size " << size() << "\n";
  out << "merges " << merges_.size() << "\n";
  for (auto [l, r] : merges_) out << l << " " << r << "\n";
  out << "pieces\n";
  for (int id = kBaseSize; id < size(); ++id) {
    out << id << "\t" << ToHex(pieces_[id]) << "\n";
  }
  return out.str();
}

SubwordVocab SubwordVocab::Deserialize(std::string_view contents) {
  std::istringstream in{std::string(contents)};
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw std::invalid_argument("not a versebias-bpe v1 vocabulary");
  }
  std::string word;
  int size = 0;
  size_t num_merges = 0;
  in >> word >> size;
  if (word != "size") throw std::invalid_argument("vocab: expected size");
  in >> word >> num_merges;
  if (word != "merges") throw std::invalid_argument("vocab: expected merges");
  SubwordVocab vocab;
  for (size_t i = 0; i < num_merges; ++i) {
    int l = -1, r = -1;
    in >> l >> r;
    if (!in || l < 0 || r < 0 || l >= vocab.size() || r >= vocab.size()) {
      throw std::invalid_argument("vocab: bad merge line " + std::to_string(i));
    }
    vocab.AddMerge(l, r);
  }
  in >> word;
  if (word != "pieces") throw std::invalid_argument("vocab: expected pieces");
  for (int id = kBaseSize; id < vocab.size(); ++id) {
    int file_id;
    std::string hex;
    in >> file_id >> hex;
    if (file_id != id || hex != ToHex(vocab.pieces_[id])) {
      throw std::invalid_argument("vocab: piece table disagrees with merges");
    }
  }
  if (vocab.size() != size) throw std::invalid_argument("vocab: size mismatch");
  return vocab;
}

void SubwordVocab::Save(const std::filesystem::path& path) const {
  WriteFile(path, Serialize());
}

SubwordVocab SubwordVocab::Load(const std::filesystem::path& path) {
  return Deserialize(ReadFile(path));
}

}  // namespace versebias
