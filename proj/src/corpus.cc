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

#include "versebias/corpus.h"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "versebias/hash.h"
#include "versebias/text.h"

namespace versebias {

namespace {

const char* const kDemographicGroups[][2] = {
    {"white person", "white people"},
    {"european", "europeans"},
    {"black person", "black people"},
    {"african", "africans"},
    {"american", "americans"},
    {"indian", "indians"},
    {"native", "natives"},
    {"asian", "asians"},
    {"caucasian", "caucasians"},
    {"chinese person", "chinese people"},
    {"hindu", "hindus"},
    {"hispanic person", "hispanic people"},
    {"indigenous person", "indigenous people"},
    {"hawaiian", "hawaiians"},
    {"islander", "islanders"},
    {"latino", "latinos"},
    {"latina", "latinas"},
    {"woman", "women"},
    {"man", "men"},
    {"girl", "girls"},
    {"boy", "boys"},
    {"christian", "christians"},
    {"jewish person", "jewish people"},
    {"muslim", "muslims"},
    {"buddhist", "buddhists"},
};

const char* const kOtherGroups[][2] = {
    {"dog", "dogs"},         {"cat", "cats"},         {"horse", "horses"},
    {"chicken", "chickens"}, {"bear", "bears"},       {"bird", "birds"},
    {"shark", "sharks"},     {"snake", "snakes"},     {"pig", "pigs"},
    {"lion", "lions"},       {"turkey", "turkeys"},   {"wolf", "wolves"},
    {"spider", "spiders"},   {"rabbit", "rabbits"},   {"duck", "ducks"},
    {"deer", "deer"},        {"cow", "cows"},         {"monkey", "monkeys"},
    {"lobster", "lobsters"}, {"ape", "apes"},         {"pony", "ponies"},
    {"eagle", "eagles"},     {"dolphin", "dolphins"}, {"bison", "bison"},
};

std::string ApplyCase(std::string_view original, std::string_view replacement) {
  std::string out(replacement);
  bool all_upper = original.size() > 1;
  for (unsigned char c : original) {
    if (!(c >= 'A' && c <= 'Z')) all_upper = false;
  }
  if (all_upper) {
    for (char& c : out) {
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
  } else if (!original.empty() && original[0] >= 'A' && original[0] <= 'Z' &&
             !out.empty() && out[0] >= 'a' && out[0] <= 'z') {
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
  }
  return out;
}

}  // namespace

nlohmann::json VerseToJson(const Verse& v) {
  return {{"poem_id", v.poem_id}, {"position", v.position}, {"text", v.text}};
}

Verse VerseFromJson(const nlohmann::json& j) {
  Verse v;
  v.poem_id = j.at("poem_id").is_string()
                  ? j.at("poem_id").get<std::string>()
                  : j.at("poem_id").dump();
  v.position = j.at("position").get<int>();
  v.text = NormalizeWhitespace(j.at("text").get<std::string>());
  return v;
}

std::vector<VersePair> SplitIntoPairs(std::span<const Verse> poem) {
  std::vector<VersePair> pairs;
  for (size_t i = 0; i + 1 < poem.size(); ++i) {
    pairs.push_back({poem[i], poem[i + 1]});
  }
  return pairs;
}

size_t LoadedCorpus::NumVerses() const {
  size_t n = 0;
  for (const auto& p : poems) n += p.size();
  return n;
}

std::vector<Verse> LoadedCorpus::AllVerses() const {
  std::vector<Verse> out;
  out.reserve(NumVerses());
  for (const auto& p : poems) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<VersePair> LoadedCorpus::AllPairs() const {
  std::vector<VersePair> out;
  for (const auto& p : poems) {
    auto pairs = SplitIntoPairs(p);
    out.insert(out.end(), pairs.begin(), pairs.end());
  }
  return out;
}

LoadedCorpus ParsePoemsJsonl(std::string_view contents) {
  LoadedCorpus out;
  // Poems keep first-appearance order; verses are sorted by position.
  std::vector<std::string> order;
  std::map<std::string, std::map<int, Verse>> by_poem;
  std::istringstream in{std::string(contents)};
  std::string line;
  while (std::getline(in, line)) {
    if (NormalizeWhitespace(line).empty()) continue;
    Verse v;
    try {
      v = VerseFromJson(nlohmann::json::parse(line));
    } catch (const std::exception&) {
      ++out.skipped;
      continue;
    }
    if (v.text.empty() || v.position < 0) {
      ++out.skipped;
      continue;
    }
    auto [it, fresh] = by_poem.try_emplace(v.poem_id);
    if (fresh) order.push_back(v.poem_id);
    if (!it->second.emplace(v.position, v).second) ++out.skipped;
  }
  for (const auto& id : order) {
    const auto& verses = by_poem[id];
    if (verses.size() < 2) {
      out.skipped += static_cast<int>(verses.size());
      continue;
    }
    std::vector<Verse> poem;
    for (const auto& [pos, v] : verses) poem.push_back(v);
    out.poems.push_back(std::move(poem));
  }
  return out;
}

LoadedCorpus ParsePoemsText(std::string_view contents,
                            std::string_view id_prefix) {
  LoadedCorpus out;
  std::vector<Verse> current;
  int poem_index = 0;
  auto flush = [&] {
    if (current.size() >= 2) {
      out.poems.push_back(std::move(current));
    } else {
      out.skipped += static_cast<int>(current.size());
    }
    current.clear();
    ++poem_index;
  };
  std::istringstream in{std::string(contents)};
  std::string line;
  while (std::getline(in, line)) {
    std::string text = NormalizeWhitespace(line);
    if (text.empty()) {
      if (!current.empty()) flush();
      continue;
    }
    Verse v;
    v.text = std::move(text);
    v.poem_id = std::string(id_prefix) + ":" + std::to_string(poem_index);
    v.position = static_cast<int>(current.size());
    current.push_back(std::move(v));
  }
  if (!current.empty()) flush();
  return out;
}

LoadedCorpus LoadCorpus(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  auto load_one = [](const fs::path& file) {
    std::string contents = ReadFile(file);
    if (file.extension() == ".jsonl") return ParsePoemsJsonl(contents);
    return ParsePoemsText(contents, file.stem().string());
  };
  if (!fs::is_directory(path)) return load_one(path);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  LoadedCorpus out;
  for (const auto& f : files) {
    LoadedCorpus part = load_one(f);
    out.skipped += part.skipped;
    for (auto& p : part.poems) out.poems.push_back(std::move(p));
  }
  return out;
}

std::string_view MentionListName(MentionList list) {
  return list == MentionList::kDemographic ? "demographic" : "other";
}

MentionLexicon::MentionLexicon(std::vector<MentionGroup> demographic,
                               std::vector<MentionGroup> other)
    : demographic_(std::move(demographic)), other_(std::move(other)) {
  std::map<std::string, std::string> owner;
  for (MentionList list : {MentionList::kDemographic, MentionList::kOther}) {
    for (const auto& g : groups(list)) {
      for (const std::string* form : {&g.singular, &g.plural}) {
        if (form->empty() || MatchKey(*form) != *form) {
          throw std::invalid_argument("lexicon form must be lowercase and "
                                      "normalized: '" + *form + "'");
        }
        auto [it, fresh] = owner.emplace(*form, g.name);
        if (!fresh && it->second != g.name) {
          throw std::invalid_argument("surface form '" + *form +
                                      "' appears in two groups");
        }
        if (!fresh) continue;  // singular == plural
        forms_.push_back({WordTokens(*form), *form, g.name, list});
      }
    }
  }
}

MentionLexicon MentionLexicon::Default() {
  std::vector<MentionGroup> demo, other;
  for (const auto& g : kDemographicGroups) demo.push_back({g[0], g[0], g[1]});
  for (const auto& g : kOtherGroups) other.push_back({g[0], g[0], g[1]});
  return MentionLexicon(std::move(demo), std::move(other));
}

MentionLexicon MentionLexicon::FromTsv(std::string_view contents) {
  std::vector<MentionGroup> demo, other;
  std::istringstream in{std::string(contents)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (NormalizeWhitespace(line).empty()) continue;
    std::vector<std::string> fields;
    std::istringstream fs(line);
    std::string field;
    while (std::getline(fs, field, '\t')) fields.push_back(NormalizeWhitespace(field));
    if (fields.size() != 4) {
      throw std::invalid_argument("lexicon line " + std::to_string(line_no) +
                                  ": expected 4 tab-separated fields");
    }
    MentionGroup g{fields[1], fields[2], fields[3]};
    if (fields[0] == "demographic") {
      demo.push_back(std::move(g));
    } else if (fields[0] == "other") {
      other.push_back(std::move(g));
    } else {
      throw std::invalid_argument("lexicon line " + std::to_string(line_no) +
                                  ": unknown list '" + fields[0] + "'");
    }
  }
  return MentionLexicon(std::move(demo), std::move(other));
}

MentionLexicon MentionLexicon::LoadFile(const std::filesystem::path& path) {
  return FromTsv(ReadFile(path));
}

std::string MentionLexicon::ToTsv() const {
  std::string out = "# list\tgroup\tsingular\tplural\n";
  for (MentionList list : {MentionList::kDemographic, MentionList::kOther}) {
    for (const auto& g : groups(list)) {
      out += std::string(MentionListName(list)) + "\t" + g.name + "\t" +
             g.singular + "\t" + g.plural + "\n";
    }
  }
  return out;
}

std::optional<Mention> FindMention(std::string_view text,
                                   const MentionLexicon& lexicon) {
  const auto tokens = WordTokens(text);
  for (size_t i = 0; i < tokens.size(); ++i) {
    const MentionLexicon::Form* best = nullptr;
    for (const auto& form : lexicon.forms()) {
      const auto& ft = form.tokens;
      if (ft.empty() || i + ft.size() > tokens.size()) continue;
      if (!std::equal(ft.begin(), ft.end(), tokens.begin() + i)) continue;
      if (best == nullptr || ft.size() > best->tokens.size()) best = &form;
    }
    if (best != nullptr) return Mention{best->group, best->surface, best->list};
  }
  return std::nullopt;
}

bool HasDemographicMention(std::string_view text,
                           const MentionLexicon& lexicon) {
  // The leftmost mention may come from the other list while a demographic
  // form appears later, so scan with a demographic-only view.
  const auto tokens = WordTokens(text);
  for (const auto& form : lexicon.forms()) {
    if (form.list != MentionList::kDemographic) continue;
    const auto& ft = form.tokens;
    if (ft.empty() || ft.size() > tokens.size()) continue;
    auto it = std::search(tokens.begin(), tokens.end(), ft.begin(), ft.end());
    if (it != tokens.end()) return true;
  }
  return false;
}

PronounMap::PronounMap(std::vector<Pair> pairs) : pairs_(std::move(pairs)) {}

PronounMap PronounMap::Default() {
  return PronounMap({{"she", "he", Kind::kSubject},
                     {"her", "him", Kind::kObject},
                     {"her", "his", Kind::kDeterminer},
                     {"hers", "his", Kind::kPossessive},
                     {"herself", "himself", Kind::kReflexive}});
}

std::optional<std::string> PronounMap::Counterpart(std::string_view lower_word,
                                                   bool followed_by_word) const {
  const Pair* determiner = nullptr;
  const Pair* other = nullptr;
  std::string_view target_determiner, target_other;
  for (const auto& p : pairs_) {
    std::string_view counterpart;
    if (p.female == lower_word) {
      counterpart = p.male;
    } else if (p.male == lower_word) {
      counterpart = p.female;
    } else {
      continue;
    }
    if (p.kind == Kind::kDeterminer) {
      if (determiner == nullptr) {
        determiner = &p;
        target_determiner = counterpart;
      }
    } else if (other == nullptr) {
      other = &p;
      target_other = counterpart;
    }
  }
  if (determiner != nullptr && (followed_by_word || other == nullptr)) {
    return std::string(target_determiner);
  }
  if (other != nullptr) return std::string(target_other);
  return std::nullopt;
}

std::string SwapGenderPronouns(std::string_view text, const PronounMap& map) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    if (!IsWordByte(static_cast<unsigned char>(text[i]))) {
      out.push_back(text[i++]);
      continue;
    }
    size_t j = i;
    while (j < text.size() && IsWordByte(static_cast<unsigned char>(text[j]))) {
      ++j;
    }
    std::string_view word = text.substr(i, j - i);
    size_t k = j;
    while (k < text.size() && (text[k] == ' ' || text[k] == '\t')) ++k;
    bool followed_by_word =
        k < text.size() && IsWordByte(static_cast<unsigned char>(text[k]));
    if (auto swapped = map.Counterpart(ToLowerAscii(word), followed_by_word)) {
      out += ApplyCase(word, *swapped);
    } else {
      out += word;
    }
    i = j;
  }
  return out;
}

Verse SwapGenderPronouns(const Verse& verse, const PronounMap& map) {
  Verse out = verse;
  out.text = SwapGenderPronouns(verse.text, map);
  return out;
}

long CorpusStats::RowTotal(int row) const {
  long t = 0;
  for (long c : counts[row]) t += c;
  return t;
}

double CorpusStats::RowPercent(int row, int cls) const {
  long t = RowTotal(row);
  return t == 0 ? 0.0 : 100.0 * static_cast<double>(counts[row][cls]) / t;
}

nlohmann::json CorpusStats::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  const char* names[] = {"with_demographic", "without_demographic"};
  for (int r = 0; r < 2; ++r) {
    rows.push_back({{"row", names[r]},
                    {"negative", counts[r][0]},
                    {"no_impact", counts[r][1]},
                    {"positive", counts[r][2]},
                    {"total", RowTotal(r)},
                    {"percent",
                     {RowPercent(r, 0), RowPercent(r, 1), RowPercent(r, 2)}}});
  }
  return rows;
}

std::string CorpusStats::ToTable() const {
  std::ostringstream out;
  out << "subset\tnext(-)\tnext(0)\tnext(+)\ttotal\n";
  const char* names[] = {"input w/ demo.", "input w/o demo."};
  out << std::fixed << std::setprecision(0);
  for (int r = 0; r < 2; ++r) {
    out << names[r];
    for (int c = 0; c < kNumPolarityClasses; ++c) {
      out << '\t' << counts[r][c] << " (" << RowPercent(r, c) << "%)";
    }
    out << '\t' << RowTotal(r) << '\n';
  }
  return out.str();
}

CorpusStats ComputeCorpusStats(std::span<const VersePair> pairs,
                               std::span<const SentimentLabel> next_labels,
                               const MentionLexicon& lexicon) {
  if (pairs.size() != next_labels.size()) {
    throw std::invalid_argument("one label per pair required");
  }
  CorpusStats stats;
  for (size_t i = 0; i < pairs.size(); ++i) {
    int row = HasDemographicMention(pairs[i].input.text, lexicon) ? 0 : 1;
    ++stats.counts[row][ClassIndex(next_labels[i])];
  }
  return stats;
}

CorpusStats ComputeCorpusStats(std::span<const VersePair> pairs,
                               const SentimentModel& model,
                               const MentionLexicon& lexicon) {
  std::vector<SentimentLabel> labels;
  labels.reserve(pairs.size());
  for (const auto& p : pairs) labels.push_back(model.Predict(p.next.text));
  return ComputeCorpusStats(pairs, labels, lexicon);
}

}  // namespace versebias
