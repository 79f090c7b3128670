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

// Poem corpora: verse records, next-verse pairs, demographic/other group
// mention lookup and counterfactual pronoun swapping.

#ifndef VERSEBIAS_CORPUS_H_
#define VERSEBIAS_CORPUS_H_

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "versebias/sentiment.h"

namespace versebias {

struct Verse {
  std::string text;  // whitespace-normalized, original casing
  std::string poem_id;
  int position = 0;

  bool operator==(const Verse&) const = default;
};

struct VersePair {
  Verse input;
  Verse next;

  bool operator==(const VersePair&) const = default;
};

nlohmann::json VerseToJson(const Verse& v);
Verse VerseFromJson(const nlohmann::json& j);

// Adjacent pairs of a poem whose verses are sorted by position. A poem of n
// verses gives max(0, n - 1) pairs.
std::vector<VersePair> SplitIntoPairs(std::span<const Verse> poem);

struct LoadedCorpus {
  std::vector<std::vector<Verse>> poems;
  // Records dropped as malformatted: unparseable lines, empty text, duplicate
  // positions, and poems too short to yield a pair.
  int skipped = 0;

  size_t NumVerses() const;
  std::vector<Verse> AllVerses() const;
  std::vector<VersePair> AllPairs() const;
};

// One JSON object per line: {"poem_id": ..., "position": ..., "text": ...}.
LoadedCorpus ParsePoemsJsonl(std::string_view contents);

// Plain text: one verse per line, poems separated by blank lines. Poem ids
// are "<prefix>:<index>".
LoadedCorpus ParsePoemsText(std::string_view contents,
                            std::string_view id_prefix);

// Dispatches on extension: .jsonl uses ParsePoemsJsonl, anything else is
// plain text. A directory loads every regular file in sorted order.
LoadedCorpus LoadCorpus(const std::filesystem::path& path);

enum class MentionList { kDemographic, kOther };
std::string_view MentionListName(MentionList list);

struct MentionGroup {
  std::string name;
  std::string singular;
  std::string plural;
};

// Curated demographic and other (animal) groups with singular and plural
// surface forms. Forms are lowercase; no form belongs to two groups. A group
// may use the same string for both forms ("deer").
class MentionLexicon {
 public:
  MentionLexicon() = default;
  MentionLexicon(std::vector<MentionGroup> demographic,
                 std::vector<MentionGroup> other);

  // 25 demographic groups and 24 other groups.
  static MentionLexicon Default();

  // Lines "list<TAB>group<TAB>singular<TAB>plural"; '#' starts a comment.
  static MentionLexicon FromTsv(std::string_view contents);
  static MentionLexicon LoadFile(const std::filesystem::path& path);
  std::string ToTsv() const;

  const std::vector<MentionGroup>& groups(MentionList list) const {
    return list == MentionList::kDemographic ? demographic_ : other_;
  }
  bool empty() const { return demographic_.empty() && other_.empty(); }

  struct Form {
    std::vector<std::string> tokens;
    std::string surface;
    std::string group;
    MentionList list;
  };
  // Every surface form, demographic before other, in list order.
  const std::vector<Form>& forms() const { return forms_; }

 private:
  std::vector<MentionGroup> demographic_;
  std::vector<MentionGroup> other_;
  std::vector<Form> forms_;
};

struct Mention {
  std::string group;
  std::string surface;
  MentionList list = MentionList::kDemographic;

  bool operator==(const Mention&) const = default;
};

// Leftmost whole-token, case-insensitive match of any surface form. At one
// start position the longest form wins.
std::optional<Mention> FindMention(std::string_view text,
                                   const MentionLexicon& lexicon);
inline std::optional<Mention> FindMention(const Verse& verse,
                                          const MentionLexicon& lexicon) {
  return FindMention(verse.text, lexicon);
}

bool HasDemographicMention(std::string_view text,
                           const MentionLexicon& lexicon);

// Female/male pronoun pairs. Forms that map to two counterparts ("her" ->
// "his"/"him", "his" -> "her"/"hers") are resolved by the following token:
// when a word follows, the determiner pair is used, otherwise the other one.
class PronounMap {
 public:
  enum class Kind { kSubject, kObject, kDeterminer, kPossessive, kReflexive };
  struct Pair {
    std::string female;
    std::string male;
    Kind kind;
  };

  explicit PronounMap(std::vector<Pair> pairs);
  static PronounMap Default();

  // Counterpart for a lowercase word, or nullopt when it is not a pronoun.
  std::optional<std::string> Counterpart(std::string_view lower_word,
                                         bool followed_by_word) const;

  const std::vector<Pair>& pairs() const { return pairs_; }

 private:
  std::vector<Pair> pairs_;
};

// Replaces every whole-word pronoun with its counterpart, keeping the casing
// pattern (lower, Capitalized, UPPER) of the original word.
std::string SwapGenderPronouns(std::string_view text, const PronounMap& map);
Verse SwapGenderPronouns(const Verse& verse, const PronounMap& map);

// Pairs partitioned by (input has a demographic mention) x (next-verse
// sentiment).
struct CorpusStats {
  // counts[row][class]; row 0 = with demographic mention, row 1 = without.
  std::array<std::array<long, kNumPolarityClasses>, 2> counts{};

  long RowTotal(int row) const;
  long Total() const { return RowTotal(0) + RowTotal(1); }
  double RowPercent(int row, int cls) const;
  nlohmann::json ToJson() const;
  std::string ToTable() const;
};

CorpusStats ComputeCorpusStats(std::span<const VersePair> pairs,
                               const SentimentModel& model,
                               const MentionLexicon& lexicon);

// Same table from precomputed next-verse labels (one per pair).
CorpusStats ComputeCorpusStats(std::span<const VersePair> pairs,
                               std::span<const SentimentLabel> next_labels,
                               const MentionLexicon& lexicon);

}  // namespace versebias

#endif  // VERSEBIAS_CORPUS_H_
