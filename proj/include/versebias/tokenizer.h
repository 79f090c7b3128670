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

// Byte-level byte-pair-encoding tokenizer shared by both encoder towers.
//
// Ids 0..3 are pad/unk/bos/eos, ids 4..259 are the 256 single bytes, and
// every later id is a learned merge of two earlier pieces. Text is
// whitespace-normalized and cut into chunks at spaces (a chunk carries its
// leading space); merges never cross chunk boundaries.

#ifndef VERSEBIAS_TOKENIZER_H_
#define VERSEBIAS_TOKENIZER_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace versebias {

class SubwordVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kNumSpecials = 4;
  static constexpr int kBaseSize = kNumSpecials + 256;

  SubwordVocab();

  // Learns merges in order of pair frequency (descending), breaking ties by
  // the byte strings of the (left, right) pieces. Pairs seen fewer than twice
  // are never merged. Throws std::invalid_argument if the corpus is empty or
  // target_size <= kBaseSize.
  static SubwordVocab Train(std::span<const std::string> corpus,
                            int target_size);

  // [bos, pieces..., eos]; the empty string encodes to [bos, eos].
  std::vector<int> Encode(std::string_view text) const;

  // Concatenated bytes of all non-special ids. Throws std::out_of_range on an
  // id outside [0, size()).
  std::string Decode(std::span<const int> ids) const;

  int size() const { return static_cast<int>(pieces_.size()); }
  const std::vector<std::pair<int, int>>& merges() const { return merges_; }
  const std::string& piece(int id) const { return pieces_.at(id); }
  static int ByteId(unsigned char b) { return kNumSpecials + b; }

  // Text format: header, size, merge list, piece table (hex bytes).
  std::string Serialize() const;
  static SubwordVocab Deserialize(std::string_view contents);
  void Save(const std::filesystem::path& path) const;
  static SubwordVocab Load(const std::filesystem::path& path);

  // Normalized chunks of a text: first word bare, later words with a leading
  // space.
  static std::vector<std::string> Chunks(std::string_view text);

 private:
  void AddMerge(int left, int right);
  void EncodeChunk(std::string_view chunk, std::vector<int>& out) const;

  std::vector<std::string> pieces_;
  std::vector<std::pair<int, int>> merges_;
  // (left << 32 | right) -> merge rank
  std::vector<std::pair<unsigned long long, int>> rank_sorted_;
  int Rank(int left, int right) const;
};

}  // namespace versebias

#endif  // VERSEBIAS_TOKENIZER_H_
