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


#include "versebias/synthetic.h"

#include <stdexcept>

namespace versebias::synthetic {

namespace {

const std::vector<std::string> kPlaces = {
    "river",  "stone",   "hill",     "road",    "field",   "cloud",
    "tree",   "wind",    "sea",      "lamp",    "door",    "bell",
    "harbor", "garden",  "meadow",   "valley",  "tower",   "bridge",
    "candle", "window",  "forest",   "mountain", "shore",  "village",
    "orchard", "chapel", "well",     "cottage", "lantern", "ship",
    "moon",   "star",    "rain",     "snow",    "morning", "evening",
    "winter", "summer",  "gate",     "wall"};

const std::vector<std::string> kVerbs = {
    "stands", "waits",  "turns",    "rests",   "lies",  "moves",
    "sleeps", "calls",  "wanders",  "gathers", "walks", "lingers",
    "looks",  "speaks", "listens",  "returns"};

const std::vector<std::string> kPrepositions = {"by the", "near the",
                                                "beyond the", "under the",
                                                "along the", "across the"};

const std::vector<std::string> kNegative = {
    "in bitter grief",   "with cruel sorrow",  "and weeps alone",
    "in cold despair",   "with lonely pain",   "and mourns the dark",
    "in dreadful gloom", "with broken tears",  "in wretched misery",
    "and curses fate",   "with hateful scorn", "in sick anguish"};

const std::vector<std::string> kPositive = {
    "in sweet delight",   "with gentle joy",    "and smiles with love",
    "in bright gladness", "with warm laughter", "and sings with hope",
    "in golden bliss",    "with tender grace",  "in happy wonder",
    "and dreams of peace", "with lovely cheer", "in glad triumph"};

const std::vector<std::string> kNeutral = {
    "at the edge of day", "as the hours pass", "in the old way",
    "once more",          "for a while",       "without a word",
    "as before",          "in the grey light", "at noon",
    "through the years",  "as it must",        "on the third day"};

const std::vector<std::string> kPronouns = {"she", "he", "her sister",
                                            "his brother"};

template <typename T>
const T& Pick(const std::vector<T>& items, UniformStream& rng) {
  return items[rng.Below(items.size())];
}

}  // namespace

std::string VerseMaker::Make(SentimentLabel label, const std::string& subject,
                             const std::string& place) {
  const std::vector<std::string>* moods = &kNeutral;
  if (label == SentimentLabel::kNegative) moods = &kNegative;
  if (label == SentimentLabel::kPositive) moods = &kPositive;
  if (!IsPolarity(label)) throw std::invalid_argument("need a polarity label");
  return subject + " " + Pick(kVerbs, rng_) + " " + Pick(kPrepositions, rng_) +
         " " + place + " " + Pick(*moods, rng_);
}

std::string VerseMaker::RandomPlace() { return Pick(kPlaces, rng_); }

std::string VerseMaker::RandomNounSubject() {
  return "the " + Pick(kPlaces, rng_);
}

SentimentLabel VerseMaker::Draw(const std::array<double, 3>& class_probs) {
  double u = rng_.Next();
  if (u < class_probs[0]) return SentimentLabel::kNegative;
  if (u < class_probs[0] + class_probs[1]) return SentimentLabel::kNoImpact;
  return SentimentLabel::kPositive;
}

std::vector<LabeledVerse> SentimentDataset(int n, uint64_t seed) {
  VerseMaker maker(seed);
  std::vector<LabeledVerse> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    SentimentLabel label = maker.Draw({0.18, 0.66, 0.16});
    std::string subject = maker.rng().Next() < 0.3
                              ? Pick(kPronouns, maker.rng())
                              : maker.RandomNounSubject();
    out.push_back({maker.Make(label, subject, maker.RandomPlace()), label});
  }
  StratifiedSplit(out, seed);
  return out;
}

LoadedCorpus PoemCorpus(const PoemCorpusConfig& config,
                        const MentionLexicon& lexicon) {
  if (config.min_verses < 2 || config.max_verses < config.min_verses) {
    throw std::invalid_argument("poem length bounds are invalid");
  }
  const auto& groups = lexicon.groups(MentionList::kDemographic);
  const auto& others = lexicon.groups(MentionList::kOther);
  VerseMaker maker(config.seed);
  UniformStream& rng = maker.rng();
  LoadedCorpus corpus;
  for (int p = 0; p < config.poems; ++p) {
    std::string group_form;
    bool demographic = !groups.empty() && rng.Next() < config.demographic_poems;
    if (demographic) {
      const MentionGroup& g = groups[rng.Below(groups.size())];
      group_form = rng.Next() < 0.5 ? g.singular : g.plural;
    } else if (!others.empty() && rng.Next() < 0.3) {
      const MentionGroup& g = others[rng.Below(others.size())];
      group_form = rng.Next() < 0.5 ? g.singular : g.plural;
    }
    int len = config.min_verses +
              static_cast<int>(rng.Below(config.max_verses - config.min_verses + 1));
    std::vector<Verse> poem;
    std::string place = maker.RandomPlace();
    bool previous_mentions = false;
    for (int v = 0; v < len; ++v) {
      SentimentLabel label =
          v == 0 ? maker.Draw(config.elsewhere)
                 : maker.Draw(previous_mentions ? config.after_demographic
                                                : config.elsewhere);
      std::string subject;
      if (!group_form.empty() && rng.Next() < config.group_mention_rate) {
        subject = "the " + group_form;
      } else if (rng.Next() < config.pronoun_rate) {
        subject = Pick(kPronouns, rng);
      } else {
        subject = maker.RandomNounSubject();
      }
      Verse verse{maker.Make(label, subject, place),
                  "synthetic:" + std::to_string(p), v};
      previous_mentions = HasDemographicMention(verse.text, lexicon);
      poem.push_back(std::move(verse));
      // Places drift slowly so neighbouring verses stay related.
      if (rng.Next() < 0.3) place = maker.RandomPlace();
    }
    corpus.poems.push_back(std::move(poem));
  }
  return corpus;
}

std::vector<std::pair<std::string, std::string>> TopicPairs(int n,
                                                            uint64_t seed) {
  VerseMaker maker(seed);
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::string place = maker.RandomPlace();
    SentimentLabel a = maker.Draw({0.2, 0.6, 0.2});
    SentimentLabel b = maker.Draw({0.2, 0.6, 0.2});
    pairs.emplace_back(maker.Make(a, maker.RandomNounSubject(), place),
                       maker.Make(b, maker.RandomNounSubject(), place));
  }
  return pairs;
}

}  // namespace versebias::synthetic
