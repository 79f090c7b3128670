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

#include "versebias/styletransfer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "versebias/text.h"

namespace versebias {

namespace {

std::string NgramKey(std::span<const std::string> tokens) {
  return JoinTokens(tokens, " ");
}

void CountNgrams(std::span<const Tokens> corpus, int n_max,
                 std::unordered_map<std::string, long>& counts) {
  for (const auto& verse : corpus) {
    for (size_t i = 0; i < verse.size(); ++i) {
      for (int n = 1; n <= n_max && i + n <= verse.size(); ++n) {
        ++counts[NgramKey(std::span(verse).subspan(i, n))];
      }
    }
  }
}

TransferResult RunTransfer(const Verse& verse, const SalienceTable& table,
                           const MarkerPool& pool, Style source) {
  TransferResult r;
  r.verse = verse;
  r.marked = DeleteMarkers(WordTokens(verse.text), table, source);
  if (r.marked.markers.empty()) {
    r.no_op = true;
    return r;
  }
  r.attribute = pool.Retrieve(r.marked);
  r.verse.text = Detokenize(GenerateStyled(r.marked, r.attribute));
  return r;
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string_view StyleName(Style style) {
  return style == Style::kNegative ? "negative" : "positive";
}

void TransferConfig::Validate() const {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (!(smoothing > 0)) throw std::invalid_argument("smoothing must be > 0");
  if (!(threshold > 1)) throw std::invalid_argument("threshold must be > 1");
}

nlohmann::json TransferConfig::ToJson() const {
  return {{"n_max", n_max}, {"smoothing", smoothing}, {"threshold", threshold}};
}

TransferConfig TransferConfig::FromJson(const nlohmann::json& j) {
  TransferConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "n_max") {
      c.n_max = value.get<int>();
    } else if (key == "smoothing") {
      c.smoothing = value.get<double>();
    } else if (key == "threshold") {
      c.threshold = value.get<double>();
    } else {
      throw std::invalid_argument("unknown style transfer config key: " + key);
    }
  }
  c.Validate();
  return c;
}

SalienceTable SalienceTable::Compute(std::span<const Tokens> negative,
                                     std::span<const Tokens> positive,
                                     const TransferConfig& config) {
  config.Validate();
  if (negative.empty() || positive.empty()) {
    throw std::invalid_argument("both style corpora must be non-empty");
  }
  std::unordered_map<std::string, long> neg, pos;
  CountNgrams(negative, config.n_max, neg);
  CountNgrams(positive, config.n_max, pos);
  SalienceTable table;
  table.config_ = config;
  for (const auto& [k, c] : neg) table.entries_[k].count_negative = c;
  for (const auto& [k, c] : pos) table.entries_[k].count_positive = c;
  const double lambda = config.smoothing;
  for (auto& [k, e] : table.entries_) {
    e.salience_negative = (e.count_negative + lambda) / (e.count_positive + lambda);
    e.salience_positive = (e.count_positive + lambda) / (e.count_negative + lambda);
  }
  return table;
}

const SalienceEntry* SalienceTable::Find(std::string_view ngram) const {
  auto it = entries_.find(std::string(ngram));
  return it == entries_.end() ? nullptr : &it->second;
}

std::string SalienceTable::ExportTsv() const {
  std::vector<const std::pair<const std::string, SalienceEntry>*> sorted;
  sorted.reserve(entries_.size());
  for (const auto& kv : entries_) sorted.push_back(&kv);
  std::sort(sorted.begin(), sorted.end(),
            [](auto* a, auto* b) { return a->first < b->first; });
  std::string out = "# n_max=" + std::to_string(config_.n_max) +
                    " smoothing=" + FormatDouble(config_.smoothing) +
                    " threshold=" + FormatDouble(config_.threshold) + "\n";
  for (const auto* kv : sorted) {
    const auto& e = kv->second;
    out += kv->first + "\t" + std::to_string(e.count_negative) + "\t" +
           std::to_string(e.count_positive) + "\t" +
           FormatDouble(e.salience_negative) + "\t" +
           FormatDouble(e.salience_positive) + "\n";
  }
  return out;
}

SalienceTable SalienceTable::ImportTsv(std::string_view contents) {
  SalienceTable table;
  std::istringstream in{std::string(contents)};
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string kv;
      while (hs >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
        if (key == "n_max") table.config_.n_max = std::stoi(value);
        if (key == "smoothing") table.config_.smoothing = std::stod(value);
        if (key == "threshold") table.config_.threshold = std::stod(value);
      }
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, '\t')) f.push_back(field);
    if (f.size() != 5) {
      throw std::invalid_argument("salience line needs 5 fields: " + line);
    }
    SalienceEntry e;
    e.count_negative = std::stol(f[1]);
    e.count_positive = std::stol(f[2]);
    e.salience_negative = std::stod(f[3]);
    e.salience_positive = std::stod(f[4]);
    table.entries_.emplace(f[0], e);
  }
  if (!header) throw std::invalid_argument("salience table missing header");
  table.config_.Validate();
  return table;
}

MarkedVerse DeleteMarkers(std::span<const std::string> tokens,
                          const SalienceTable& table, Style source_style) {
  MarkedVerse out;
  out.original.assign(tokens.begin(), tokens.end());
  out.source_style = source_style;
  const auto& cfg = table.config();
  size_t i = 0;
  while (i < tokens.size()) {
    int matched = 0;
    for (int n = std::min<int>(cfg.n_max, static_cast<int>(tokens.size() - i));
         n >= 1; --n) {
      const SalienceEntry* e = table.Find(NgramKey(tokens.subspan(i, n)));
      if (e != nullptr && e->Salience(source_style) > cfg.threshold) {
        matched = n;
        break;
      }
    }
    if (matched > 0) {
      out.markers.push_back(
          {Tokens(tokens.begin() + i, tokens.begin() + i + matched),
           static_cast<int>(i)});
      i += matched;
    } else {
      out.content.push_back(tokens[i]);
      ++i;
    }
  }
  return out;
}

Tokens Reconstruct(const MarkedVerse& marked) {
  Tokens out;
  size_t c = 0;
  for (const auto& m : marked.markers) {
    while (out.size() < static_cast<size_t>(m.start) && c < marked.content.size()) {
      out.push_back(marked.content[c++]);
    }
    out.insert(out.end(), m.ngram.begin(), m.ngram.end());
  }
  while (c < marked.content.size()) out.push_back(marked.content[c++]);
  return out;
}

MarkerPool::MarkerPool(std::vector<MarkedVerse> elements) {
  for (auto& e : elements) {
    if (!e.markers.empty()) elements_.push_back(std::move(e));
  }
  const size_t n = elements_.size();
  std::vector<int> df;
  std::vector<std::map<int, int>> tf(n);
  for (size_t i = 0; i < n; ++i) {
    content_keys_.push_back(JoinTokens(elements_[i].content, " "));
    for (const auto& t : elements_[i].content) {
      auto [it, fresh] =
          term_ids_.emplace(t, static_cast<int>(term_ids_.size()));
      if (fresh) df.push_back(0);
      if (tf[i][it->second]++ == 0) ++df[it->second];
    }
  }
  idf_.resize(df.size());
  for (size_t t = 0; t < df.size(); ++t) {
    idf_[t] = std::log((1.0 + n) / (1.0 + df[t])) + 1.0;
  }
  postings_.resize(df.size());
  vectors_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    double norm = 0;
    for (auto [t, c] : tf[i]) {
      double w = c * idf_[t];
      vectors_[i].emplace_back(t, w);
      norm += w * w;
    }
    norm = std::sqrt(norm);
    for (auto& [t, w] : vectors_[i]) {
      w /= norm;
      postings_[t].emplace_back(static_cast<int>(i), w);
    }
  }
}

MarkerPool::SparseVector MarkerPool::QueryVector(
    std::span<const std::string> content) const {
  std::map<std::string, int> tf;
  for (const auto& t : content) ++tf[t];
  const double unseen_idf = std::log(1.0 + elements_.size()) + 1.0;
  SparseVector v;
  double norm = 0;
  for (const auto& [term, c] : tf) {
    auto it = term_ids_.find(term);
    double w = c * (it == term_ids_.end() ? unseen_idf : idf_[it->second]);
    norm += w * w;
    if (it != term_ids_.end()) v.emplace_back(it->second, w);
  }
  if (norm > 0) {
    norm = std::sqrt(norm);
    for (auto& [t, w] : v) w /= norm;
  }
  std::sort(v.begin(), v.end());
  return v;
}

double MarkerPool::Similarity(const MarkedVerse& query, size_t i) const {
  SparseVector q = QueryVector(query.content);
  const SparseVector& d = vectors_.at(i);
  double dot = 0;
  size_t a = 0, b = 0;
  while (a < q.size() && b < d.size()) {
    if (q[a].first == d[b].first) {
      dot += q[a++].second * d[b++].second;
    } else if (q[a].first < d[b].first) {
      ++a;
    } else {
      ++b;
    }
  }
  return dot;
}

AttributeMarker MarkerPool::Retrieve(const MarkedVerse& query) const {
  if (elements_.empty()) {
    throw NoTransferableAttribute("marker pool is empty");
  }
  std::vector<double> scores(elements_.size(), 0.0);
  for (const auto& [t, qw] : QueryVector(query.content)) {
    for (const auto& [doc, dw] : postings_[t]) scores[doc] += qw * dw;
  }
  size_t best = 0;
  for (size_t i = 1; i < elements_.size(); ++i) {
    if (scores[i] > scores[best]) {
      best = i;
    } else if (scores[i] == scores[best]) {
      int cmp = content_keys_[i].compare(content_keys_[best]);
      if (cmp < 0 || (cmp == 0 && elements_[i].markers[0].ngram <
                                      elements_[best].markers[0].ngram)) {
        best = i;
      }
    }
  }
  const MarkedVerse& e = elements_[best];
  return {e.markers.front().ngram, e.source_style, e.content};
}

Tokens GenerateStyled(const MarkedVerse& marked, const AttributeMarker& attr) {
  Tokens out = marked.content;
  size_t at = out.size();
  if (!marked.markers.empty()) {
    at = std::min(out.size(), static_cast<size_t>(marked.markers[0].start));
  }
  out.insert(out.begin() + at, attr.tokens.begin(), attr.tokens.end());
  return out;
}

StyleTransfer::StyleTransfer(SalienceTable table, MarkerPool target_pool,
                             Style source, Style target)
    : table_(std::move(table)),
      pool_(std::move(target_pool)),
      source_(source),
      target_(target) {}

StyleTransfer StyleTransfer::Build(std::span<const std::string> verses,
                                   const SentimentModel& model,
                                   const TransferConfig& config, Style source) {
  std::vector<Tokens> negative, positive;
  for (const auto& v : verses) {
    SentimentLabel label = model.Predict(v);
    if (label == SentimentLabel::kNegative) negative.push_back(WordTokens(v));
    if (label == SentimentLabel::kPositive) positive.push_back(WordTokens(v));
  }
  SalienceTable table = SalienceTable::Compute(negative, positive, config);
  Style target = Opposite(source);
  std::vector<MarkedVerse> pool;
  for (const auto& t : target == Style::kPositive ? positive : negative) {
    pool.push_back(DeleteMarkers(t, table, target));
  }
  return StyleTransfer(std::move(table), MarkerPool(std::move(pool)), source,
                       target);
}

TransferResult StyleTransfer::Transfer(const Verse& verse) const {
  return RunTransfer(verse, table_, pool_, source_);
}

TransferResult ToPositive(const Verse& verse, const SalienceTable& table,
                          const MarkerPool& positive_pool) {
  return RunTransfer(verse, table, positive_pool, Style::kNegative);
}

}  // namespace versebias
