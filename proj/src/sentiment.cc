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

#include "versebias/sentiment.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "versebias/hash.h"
#include "versebias/random.h"
#include "versebias/text.h"

namespace versebias {

namespace {

constexpr std::array<std::string_view, 5> kLabelNames = {
    "negative", "no_impact", "positive", "mixed", "nonsense"};

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename Fn>
void ForEachLine(std::string_view contents, Fn&& fn) {
  size_t line_no = 0;
  size_t start = 0;
  while (start <= contents.size()) {
    size_t nl = contents.find('\n', start);
    std::string_view line = nl == std::string_view::npos
                                ? contents.substr(start)
                                : contents.substr(start, nl - start);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line_no, line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
}

}  // namespace

std::string_view LabelName(SentimentLabel label) {
  return kLabelNames[static_cast<int>(label)];
}

std::optional<SentimentLabel> ParseLabelName(std::string_view name) {
  for (size_t i = 0; i < kLabelNames.size(); ++i) {
    if (kLabelNames[i] == name) return static_cast<SentimentLabel>(i);
  }
  return std::nullopt;
}

bool IsPolarity(SentimentLabel label) {
  return label == SentimentLabel::kNegative ||
         label == SentimentLabel::kNoImpact ||
         label == SentimentLabel::kPositive;
}

int NumericScore(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::kNegative:
      return -1;
    case SentimentLabel::kNoImpact:
      return 0;
    case SentimentLabel::kPositive:
      return 1;
    default:
      throw std::invalid_argument("label " + std::string(LabelName(label)) +
                                  " has no numeric sentiment value");
  }
}

int ClassIndex(SentimentLabel label) {
  if (!IsPolarity(label)) {
    throw std::invalid_argument("not a polarity label: " +
                                std::string(LabelName(label)));
  }
  return static_cast<int>(label);
}

SentimentLabel LabelFromClassIndex(int index) {
  if (index < 0 || index >= kNumPolarityClasses) {
    throw std::out_of_range("class index out of range");
  }
  return static_cast<SentimentLabel>(index);
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "?";
}

std::optional<LabeledVerse> ResolveAnnotations(const AnnotatedVerse& verse,
                                               Split split) {
  if (verse.label_a != verse.label_b || !IsPolarity(verse.label_a)) {
    return std::nullopt;
  }
  return LabeledVerse{verse.text, verse.label_a, split};
}

int DatasetStats::At(Split split, SentimentLabel label) const {
  return counts[static_cast<int>(split)][ClassIndex(label)];
}

int DatasetStats::SplitTotal(Split split) const {
  const auto& row = counts[static_cast<int>(split)];
  return std::accumulate(row.begin(), row.end(), 0);
}

int DatasetStats::Total() const {
  return SplitTotal(Split::kTrain) + SplitTotal(Split::kDev) +
         SplitTotal(Split::kTest);
}

std::string DatasetStats::ToTable() const {
  std::ostringstream out;
  out << "label\ttrain\tdev\ttest\n";
  for (int c = 0; c < kNumPolarityClasses; ++c) {
    out << LabelName(LabelFromClassIndex(c));
    for (int s = 0; s < 3; ++s) out << '\t' << counts[s][c];
    out << '\n';
  }
  return out.str();
}

DatasetStats ComputeDatasetStats(std::span<const LabeledVerse> dataset) {
  DatasetStats stats;
  for (const auto& v : dataset) {
    ++stats.counts[static_cast<int>(v.split)][ClassIndex(v.label)];
  }
  return stats;
}

LabelMap::LabelMap(std::map<std::string, SentimentLabel> mapping)
    : mapping_(mapping.begin(), mapping.end()) {}

LabelMap LabelMap::Default() {
  return LabelMap({{"-1", SentimentLabel::kNegative},
                   {"0", SentimentLabel::kNoImpact},
                   {"1", SentimentLabel::kPositive},
                   {"2", SentimentLabel::kMixed}});
}

LabelMap LabelMap::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("label map must be an object");
  std::map<std::string, SentimentLabel> mapping;
  for (const auto& [raw, name] : j.items()) {
    auto label = ParseLabelName(name.get<std::string>());
    if (!label) {
      throw std::invalid_argument("unknown label name in label map: " +
                                  name.get<std::string>());
    }
    mapping.emplace(raw, *label);
  }
  return LabelMap(std::move(mapping));
}

LabelMap LabelMap::LoadFile(const std::filesystem::path& path) {
  return FromJson(nlohmann::json::parse(ReadFile(path)));
}

SentimentLabel LabelMap::Map(std::string_view raw) const {
  auto it = mapping_.find(Trim(raw));
  if (it == mapping_.end()) {
    throw std::invalid_argument("unmapped label value '" + std::string(raw) +
                                "'");
  }
  return it->second;
}

LoadedDataset ParseLabeledTsv(std::string_view contents, Split split,
                              const LabelMap& labels) {
  LoadedDataset out;
  ForEachLine(contents, [&](size_t line_no, std::string_view line) {
    if (Trim(line).empty()) return;
    auto fields = SplitTabs(line);
    if (fields.size() != 3) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected 3 tab-separated fields");
    }
    SentimentLabel label = labels.Map(fields[2]);
    if (!IsPolarity(label)) {
      ++out.excluded;
      return;
    }
    out.verses.push_back({std::string(fields[1]), label, split});
  });
  return out;
}

LoadedDataset ParseAnnotationTsv(std::string_view contents,
                                 const LabelMap& labels) {
  LoadedDataset out;
  out.had_splits = false;
  ForEachLine(contents, [&](size_t line_no, std::string_view line) {
    if (Trim(line).empty()) return;
    auto fields = SplitTabs(line);
    if (fields.size() != 4) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected 4 tab-separated fields");
    }
    AnnotatedVerse a{std::string(fields[1]), labels.Map(fields[2]),
                     labels.Map(fields[3])};
    if (auto kept = ResolveAnnotations(a)) {
      out.verses.push_back(std::move(*kept));
    } else {
      ++out.excluded;
    }
  });
  return out;
}

void StratifiedSplit(std::vector<LabeledVerse>& verses, uint64_t seed) {
  UniformStream rng(seed);
  for (int c = 0; c < kNumPolarityClasses; ++c) {
    std::vector<size_t> members;
    for (size_t i = 0; i < verses.size(); ++i) {
      if (ClassIndex(verses[i].label) == c) members.push_back(i);
    }
    SeededShuffle(members, rng);
    size_t n = members.size();
    size_t n_dev = n / 10;
    size_t n_test = n / 10;
    for (size_t k = 0; k < n; ++k) {
      Split s = k < n_dev            ? Split::kDev
                : k < n_dev + n_test ? Split::kTest
                                     : Split::kTrain;
      verses[members[k]].split = s;
    }
  }
}

LoadedDataset LoadSentimentDataset(const std::filesystem::path& path,
                                   const LabelMap& labels, uint64_t seed) {
  namespace fs = std::filesystem;
  auto single_file = [&](const fs::path& file) {
    LoadedDataset d = ParseLabeledTsv(ReadFile(file), Split::kTrain, labels);
    d.had_splits = false;
    StratifiedSplit(d.verses, seed);
    return d;
  };
  if (fs::is_regular_file(path)) return single_file(path);
  if (!fs::is_directory(path)) {
    throw std::runtime_error("sentiment dataset not found: " + path.string());
  }
  fs::path train = path / "train.tsv";
  fs::path dev = path / "dev.tsv";
  if (!fs::exists(dev)) dev = path / "validation.tsv";
  fs::path test = path / "test.tsv";
  if (fs::exists(train) && fs::exists(dev) && fs::exists(test)) {
    LoadedDataset out;
    for (auto [file, split] : {std::pair{train, Split::kTrain},
                               std::pair{dev, Split::kDev},
                               std::pair{test, Split::kTest}}) {
      LoadedDataset part = ParseLabeledTsv(ReadFile(file), split, labels);
      out.excluded += part.excluded;
      out.verses.insert(out.verses.end(), part.verses.begin(),
                        part.verses.end());
    }
    return out;
  }
  if (fs::exists(path / "data.tsv")) return single_file(path / "data.tsv");
  throw std::runtime_error("no train/dev/test.tsv or data.tsv under " +
                           path.string());
}

nlohmann::json SentimentConfig::ToJson() const {
  return {{"max_ngram", max_ngram},
          {"l2", l2},
          {"epochs", epochs},
          {"learning_rate", learning_rate},
          {"seed", seed}};
}

SentimentConfig SentimentConfig::FromJson(const nlohmann::json& j) {
  SentimentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "max_ngram") {
      c.max_ngram = value.get<int>();
    } else if (key == "l2") {
      c.l2 = value.get<double>();
    } else if (key == "epochs") {
      c.epochs = value.get<int>();
    } else if (key == "learning_rate") {
      c.learning_rate = value.get<double>();
    } else if (key == "seed") {
      c.seed = value.get<uint64_t>();
    } else {
      throw std::invalid_argument("unknown sentiment config key: " + key);
    }
  }
  if (c.max_ngram < 1 || c.epochs < 1 || c.learning_rate <= 0 || c.l2 < 0) {
    throw std::invalid_argument("invalid sentiment config");
  }
  return c;
}

std::array<double, kNumPolarityClasses> Softmax3(
    const std::array<double, kNumPolarityClasses>& scores) {
  double m = *std::max_element(scores.begin(), scores.end());
  std::array<double, kNumPolarityClasses> p{};
  double z = 0;
  for (int c = 0; c < kNumPolarityClasses; ++c) {
    p[c] = std::exp(scores[c] - m);
    z += p[c];
  }
  for (double& v : p) v /= z;
  return p;
}

int ArgMax3(const std::array<double, kNumPolarityClasses>& scores) {
  int best = 0;
  for (int c = 1; c < kNumPolarityClasses; ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return best;
}

std::vector<std::string> SentimentModel::ExtractFeatures(
    std::string_view text) const {
  auto tokens = WordTokens(text);
  std::set<std::string> feats;
  for (int n = 1; n <= config_.max_ngram; ++n) {
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
      feats.insert(JoinTokens(std::span(tokens).subspan(i, n)));
    }
  }
  return {feats.begin(), feats.end()};
}

std::vector<int> SentimentModel::FeatureIds(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& f : ExtractFeatures(text)) {
    auto it = feature_index_.find(f);
    if (it != feature_index_.end()) ids.push_back(it->second);
  }
  return ids;
}

std::array<double, kNumPolarityClasses> SentimentModel::Scores(
    std::span<const int> ids) const {
  auto s = bias_;
  for (int id : ids) {
    for (int c = 0; c < kNumPolarityClasses; ++c) s[c] += weights_[id][c];
  }
  return s;
}

SentimentModel SentimentModel::Train(std::span<const LabeledVerse> train,
                                     std::span<const LabeledVerse> dev,
                                     const SentimentConfig& config,
                                     SentimentTrainReport* report) {
  std::array<int, kNumPolarityClasses> class_counts{};
  for (const auto& v : train) ++class_counts[ClassIndex(v.label)];
  for (int c = 0; c < kNumPolarityClasses; ++c) {
    if (class_counts[c] == 0) {
      throw std::invalid_argument(
          "training set has no examples of class " +
          std::string(LabelName(LabelFromClassIndex(c))));
    }
  }

  SentimentModel model;
  model.config_ = config;
  std::set<std::string> vocab;
  std::vector<std::vector<std::string>> raw_features;
  raw_features.reserve(train.size());
  for (const auto& v : train) {
    raw_features.push_back(model.ExtractFeatures(v.text));
    vocab.insert(raw_features.back().begin(), raw_features.back().end());
  }
  model.features_.assign(vocab.begin(), vocab.end());
  for (size_t i = 0; i < model.features_.size(); ++i) {
    model.feature_index_.emplace(model.features_[i], static_cast<int>(i));
  }
  model.weights_.assign(model.features_.size(), {});

  std::vector<std::vector<int>> x(train.size());
  std::vector<int> y(train.size());
  for (size_t i = 0; i < train.size(); ++i) {
    for (const auto& f : raw_features[i]) {
      x[i].push_back(model.feature_index_.at(f));
    }
    y[i] = ClassIndex(train[i].label);
  }
  std::vector<std::vector<int>> dev_x(dev.size());
  for (size_t i = 0; i < dev.size(); ++i) dev_x[i] = model.FeatureIds(dev[i].text);

  auto dev_accuracy = [&](const SentimentModel& m) {
    if (dev.empty()) return 0.0;
    int correct = 0;
    for (size_t i = 0; i < dev.size(); ++i) {
      if (ArgMax3(m.Scores(dev_x[i])) == ClassIndex(dev[i].label)) ++correct;
    }
    return static_cast<double>(correct) / dev.size();
  };

  SentimentTrainReport local_report;
  SentimentModel best = model;
  double best_acc = -1.0;
  const double inv_n = 1.0 / static_cast<double>(train.size());
  std::vector<std::array<double, kNumPolarityClasses>> grad_w(
      model.weights_.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (size_t f = 0; f < grad_w.size(); ++f) {
      for (int c = 0; c < kNumPolarityClasses; ++c) {
        grad_w[f][c] = config.l2 * model.weights_[f][c];
      }
    }
    std::array<double, kNumPolarityClasses> grad_b{};
    for (size_t i = 0; i < train.size(); ++i) {
      auto p = Softmax3(model.Scores(x[i]));
      p[y[i]] -= 1.0;
      for (int c = 0; c < kNumPolarityClasses; ++c) {
        double g = p[c] * inv_n;
        grad_b[c] += g;
        for (int id : x[i]) grad_w[id][c] += g;
      }
    }
    for (size_t f = 0; f < grad_w.size(); ++f) {
      for (int c = 0; c < kNumPolarityClasses; ++c) {
        model.weights_[f][c] -= config.learning_rate * grad_w[f][c];
      }
    }
    for (int c = 0; c < kNumPolarityClasses; ++c) {
      model.bias_[c] -= config.learning_rate * grad_b[c];
    }
    double acc = dev_accuracy(model);
    local_report.dev_accuracy.push_back(acc);
    if (dev.empty() || acc > best_acc) {
      best_acc = acc;
      best = model;
      local_report.best_epoch = epoch;
    }
  }
  local_report.best_dev_accuracy = dev.empty() ? 0.0 : best_acc;
  local_report.train_accuracy = Accuracy(best, train);
  if (report != nullptr) *report = std::move(local_report);
  return best;
}

Classification SentimentModel::Classify(std::string_view text) const {
  Classification out;
  if (WordTokens(text).empty()) {
    out.label = SentimentLabel::kNoImpact;
    out.probabilities.fill(1.0 / kNumPolarityClasses);
    return out;
  }
  auto scores = Scores(FeatureIds(text));
  out.probabilities = Softmax3(scores);
  out.label = LabelFromClassIndex(ArgMax3(scores));
  return out;
}

nlohmann::json SentimentModel::ToJson() const {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& row : weights_) w.push_back(row);
  return {{"format", "versebias-sentiment"},
          {"version", 1},
          {"config", config_.ToJson()},
          {"features", features_},
          {"weights", std::move(w)},
          {"bias", bias_}};
}

SentimentModel SentimentModel::FromJson(const nlohmann::json& j) {
  if (j.at("format") != "versebias-sentiment" || j.at("version") != 1) {
    throw std::invalid_argument("not a versebias sentiment model v1");
  }
  SentimentModel m;
  m.config_ = SentimentConfig::FromJson(j.at("config"));
  m.features_ = j.at("features").get<std::vector<std::string>>();
  m.weights_ =
      j.at("weights").get<std::vector<std::array<double, kNumPolarityClasses>>>();
  m.bias_ = j.at("bias").get<std::array<double, kNumPolarityClasses>>();
  if (m.weights_.size() != m.features_.size()) {
    throw std::invalid_argument("sentiment model weight/feature size mismatch");
  }
  for (size_t i = 0; i < m.features_.size(); ++i) {
    m.feature_index_.emplace(m.features_[i], static_cast<int>(i));
  }
  return m;
}

void SentimentModel::Save(const std::filesystem::path& path) const {
  WriteFile(path, ToJson().dump());
}

SentimentModel SentimentModel::Load(const std::filesystem::path& path) {
  return FromJson(nlohmann::json::parse(ReadFile(path)));
}

double Accuracy(const SentimentModel& model,
                std::span<const LabeledVerse> dataset) {
  if (dataset.empty()) return 0.0;
  int correct = 0;
  for (const auto& v : dataset) {
    if (model.Predict(v.text) == v.label) ++correct;
  }
  return static_cast<double>(correct) / dataset.size();
}

}  // namespace versebias
