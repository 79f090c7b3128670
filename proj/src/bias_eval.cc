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


#include "versebias/bias_eval.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

namespace versebias {

namespace {

MentionList ParseList(const std::string& name) {
  if (name == MentionListName(MentionList::kDemographic)) {
    return MentionList::kDemographic;
  }
  if (name == MentionListName(MentionList::kOther)) return MentionList::kOther;
  throw std::invalid_argument("unknown mention list: " + name);
}

ListSummary SummaryFromJson(const nlohmann::json& j) {
  ListSummary s;
  s.count = j.at("count").get<long>();
  s.mean = j.at("mean").get<double>();
  s.std_dev = j.at("std").get<double>();
  s.group_means = j.at("group_means").get<std::map<std::string, double>>();
  return s;
}

nlohmann::json SummaryToJson(const ListSummary& s) {
  return {{"count", s.count},
          {"mean", s.mean},
          {"std", s.std_dev},
          {"group_means", s.group_means}};
}

}  // namespace

std::vector<Prompt> BuildPrompts(const MentionLexicon& lexicon) {
  std::vector<Prompt> prompts;
  for (auto list : {MentionList::kDemographic, MentionList::kOther}) {
    for (const auto& g : lexicon.groups(list)) {
      prompts.push_back({"The " + g.singular, g.name, list});
      prompts.push_back({"The " + g.plural, g.name, list});
    }
  }
  return prompts;
}

double PromptResult::Mean() const {
  if (verses.empty()) return 0.0;
  double sum = 0;
  for (const auto& v : verses) sum += v.score;
  return sum / static_cast<double>(verses.size());
}

ListSummary BiasReport::Summary(MentionList list) const {
  ListSummary s;
  double sum = 0, sum_sq = 0;
  std::map<std::string, std::pair<double, long>> groups;
  for (const auto& p : prompts) {
    if (p.prompt.list != list) continue;
    auto& g = groups[p.prompt.group];
    for (const auto& v : p.verses) {
      sum += v.score;
      sum_sq += static_cast<double>(v.score) * v.score;
      ++s.count;
      g.first += v.score;
      ++g.second;
    }
  }
  if (s.count > 0) {
    s.mean = sum / static_cast<double>(s.count);
    double var = sum_sq / static_cast<double>(s.count) - s.mean * s.mean;
    s.std_dev = std::sqrt(std::max(0.0, var));
  }
  for (const auto& [name, acc] : groups) {
    s.group_means[name] = acc.second ? acc.first / acc.second : 0.0;
  }
  return s;
}

nlohmann::json BiasReport::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : prompts) {
    nlohmann::json verses = nlohmann::json::array();
    for (const auto& v : p.verses) {
      verses.push_back({{"verse", v.verse},
                        {"label", LabelName(v.label)},
                        {"score", v.score}});
    }
    rows.push_back({{"prompt", p.prompt.text},
                    {"group", p.prompt.group},
                    {"list", MentionListName(p.prompt.list)},
                    {"verses", verses}});
  }
  return {{"model", model_tag},
          {"k", k},
          {"demographic", SummaryToJson(Summary(MentionList::kDemographic))},
          {"other", SummaryToJson(Summary(MentionList::kOther))},
          {"prompts", rows}};
}

BiasReport BiasReport::FromJson(const nlohmann::json& j) {
  BiasReport r;
  r.model_tag = j.at("model").get<std::string>();
  r.k = j.at("k").get<int>();
  for (const auto& row : j.at("prompts")) {
    PromptResult p;
    p.prompt = {row.at("prompt").get<std::string>(),
                row.at("group").get<std::string>(),
                ParseList(row.at("list").get<std::string>())};
    for (const auto& v : row.at("verses")) {
      auto label = ParseLabelName(v.at("label").get<std::string>());
      if (!label) throw std::invalid_argument("bias report: unknown label");
      int score = v.at("score").get<int>();
      if (score != NumericScore(*label)) {
        throw std::invalid_argument("bias report: score disagrees with label");
      }
      p.verses.push_back({v.at("verse").get<std::string>(), *label, score});
    }
    r.prompts.push_back(std::move(p));
  }
  for (auto list : {MentionList::kDemographic, MentionList::kOther}) {
    auto key = std::string(MentionListName(list));
    if (!j.contains(key)) continue;
    auto stored = SummaryFromJson(j.at(key));
    auto fresh = r.Summary(list);
    if (stored.count != fresh.count ||
        std::abs(stored.mean - fresh.mean) > 1e-9 ||
        std::abs(stored.std_dev - fresh.std_dev) > 1e-9) {
      throw std::invalid_argument("bias report: summary disagrees with " +
                                  key + " scores");
    }
  }
  return r;
}

BiasReport EvaluateModel(const std::string& model_tag,
                         const std::vector<Prompt>& prompts, int k,
                         const SuggestFn& suggest, const LabelFn& label) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  BiasReport report;
  report.model_tag = model_tag;
  report.k = k;
  for (const auto& prompt : prompts) {
    PromptResult result{prompt, {}};
    for (auto& verse : suggest(prompt.text, k)) {
      SentimentLabel l = label(verse);
      result.verses.push_back({std::move(verse), l, NumericScore(l)});
    }
    report.prompts.push_back(std::move(result));
  }
  return report;
}

BiasReport EvaluateModel(const std::string& model_tag,
                         const retriever::VerseIndex& index,
                         const retriever::Retriever& retriever,
                         const std::vector<Prompt>& prompts, int k,
                         const SentimentModel& sentiment) {
  std::unordered_map<std::string, SentimentLabel> cache;
  return EvaluateModel(
      model_tag, prompts, k,
      [&](const std::string& prompt, int n) {
        std::vector<std::string> out;
        for (auto& s : index.Suggest(retriever, prompt, n)) {
          out.push_back(std::move(s.verse));
        }
        return out;
      },
      [&](const std::string& verse) {
        auto it = cache.find(verse);
        if (it == cache.end()) {
          it = cache.emplace(verse, sentiment.Predict(verse)).first;
        }
        return it->second;
      });
}

BiasComparison Compare(const BiasReport& baseline,
                       const BiasReport& augmented) {
  if (baseline.k != augmented.k) {
    throw std::invalid_argument("reports use different k (" +
                                std::to_string(baseline.k) + " vs " +
                                std::to_string(augmented.k) + ")");
  }
  if (baseline.prompts.size() != augmented.prompts.size()) {
    throw std::invalid_argument("reports use different prompt sets");
  }
  BiasComparison c;
  c.baseline_tag = baseline.model_tag;
  c.augmented_tag = augmented.model_tag;
  c.k = baseline.k;
  for (size_t i = 0; i < baseline.prompts.size(); ++i) {
    const auto& b = baseline.prompts[i];
    const auto& a = augmented.prompts[i];
    if (!(b.prompt == a.prompt)) {
      throw std::invalid_argument("reports use different prompt sets: \"" +
                                  b.prompt.text + "\" vs \"" + a.prompt.text +
                                  "\"");
    }
    c.prompts.push_back({b.prompt, b.Mean(), a.Mean(), a.Mean() - b.Mean()});
  }
  for (auto list : {MentionList::kDemographic, MentionList::kOther}) {
    ListDelta d;
    d.baseline = baseline.Summary(list);
    d.augmented = augmented.Summary(list);
    d.delta_mean = d.augmented.mean - d.baseline.mean;
    d.delta_std = d.augmented.std_dev - d.baseline.std_dev;
    (list == MentionList::kDemographic ? c.demographic : c.other) = d;
  }
  return c;
}

nlohmann::json BiasComparison::ToJson() const {
  nlohmann::json j = {{"baseline", baseline_tag},
                      {"augmented", augmented_tag},
                      {"k", k}};
  for (auto l : {MentionList::kDemographic, MentionList::kOther}) {
    const auto& d = list(l);
    j[std::string(MentionListName(l))] = {
        {"baseline", SummaryToJson(d.baseline)},
        {"augmented", SummaryToJson(d.augmented)},
        {"delta_mean", d.delta_mean},
        {"delta_std", d.delta_std},
        {"mean_shift", d.delta_mean > 0 ? "up" : d.delta_mean < 0 ? "down" : "none"}};
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : prompts) {
    rows.push_back({{"prompt", p.prompt.text},
                    {"list", MentionListName(p.prompt.list)},
                    {"baseline_mean", p.baseline_mean},
                    {"augmented_mean", p.augmented_mean},
                    {"delta", p.delta}});
  }
  j["prompts"] = rows;
  return j;
}

std::string BiasComparison::ToTable() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %9s %9s %9s %9s %9s %9s\n", "list",
                "base.mean", "base.std", "aug.mean", "aug.std", "d.mean",
                "d.std");
  out += line;
  for (auto l : {MentionList::kDemographic, MentionList::kOther}) {
    const auto& d = list(l);
    std::snprintf(line, sizeof line,
                  "%-12s %9.3f %9.3f %9.3f %9.3f %+9.3f %+9.3f\n",
                  std::string(MentionListName(l)).c_str(), d.baseline.mean,
                  d.baseline.std_dev, d.augmented.mean, d.augmented.std_dev,
                  d.delta_mean, d.delta_std);
    out += line;
  }
  return out;
}

}  // namespace versebias
