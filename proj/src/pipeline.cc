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


#include "versebias/pipeline.h"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <map>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "versebias/bias_eval.h"
#include "versebias/hash.h"
#include "versebias/text.h"
#include "versebias/tokenizer.h"

namespace versebias::pipeline {

namespace {

using nlohmann::json;

constexpr char kManifest[] = "manifest.json";
constexpr char kLockFile[] = ".versebias.lock";

const std::map<std::string, std::vector<std::string>>& Dependencies() {
  static const auto* deps = new std::map<std::string, std::vector<std::string>>{
      {"ingest", {}},
      {"train-sentiment", {}},
      {"build-salience", {"ingest", "train-sentiment"}},
      {"style-transfer", {"ingest", "train-sentiment", "build-salience"}},
      {"augment", {"ingest", "train-sentiment", "style-transfer"}},
      {"train-tokenizer", {"ingest"}},
      {"train-retriever:baseline", {"ingest", "train-tokenizer"}},
      {"train-retriever:augmented", {"augment", "train-tokenizer"}},
      {"build-index:baseline",
       {"ingest", "train-tokenizer", "train-retriever:baseline"}},
      {"build-index:augmented",
       {"ingest", "train-tokenizer", "train-retriever:augmented"}},
      {"eval-bias:baseline",
       {"ingest", "train-sentiment", "train-tokenizer",
        "train-retriever:baseline", "build-index:baseline"}},
      {"eval-bias:augmented",
       {"ingest", "train-sentiment", "train-tokenizer",
        "train-retriever:augmented", "build-index:augmented"}},
      {"compare", {"eval-bias:baseline", "eval-bias:augmented"}},
  };
  return *deps;
}

const std::vector<std::string>& Deps(const std::string& stage) {
  auto it = Dependencies().find(stage);
  if (it == Dependencies().end()) {
    throw std::invalid_argument("unknown stage: " + stage);
  }
  return it->second;
}

std::string CommandFor(const std::string& stage) {
  std::string cmd = stage;
  std::replace(cmd.begin(), cmd.end(), ':', ' ');
  return "versebias " + cmd;
}

// Hash of a file, or of a directory's regular files (names and contents).
std::string HashPath(const fs::path& path) {
  if (!fs::is_directory(path)) return Sha256File(path);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(path)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& f : files) {
    listing += fs::relative(f, path).generic_string() + "\t" + Sha256File(f) +
               "\n";
  }
  return Sha256Hex(listing);
}

fs::path Resolve(const json& v, const fs::path& base) {
  fs::path p = v.get<std::string>();
  if (p.empty()) return p;
  return p.is_absolute() ? p : fs::weakly_canonical(base / p);
}

template <typename Fn>
void ForEachKey(const json& j, const std::string& where, Fn fn) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!fn(key, value)) {
      throw std::invalid_argument("unknown key in " + where + ": " + key);
    }
  }
}

std::string JsonLines(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  return out;
}

std::vector<json> ReadJsonLines(const fs::path& path) {
  std::istringstream in(ReadFile(path));
  std::vector<json> rows;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) rows.push_back(json::parse(line));
  }
  return rows;
}

std::string RewriteKey(const Verse& v) {
  return v.poem_id + "\t" + std::to_string(v.position);
}

}  // namespace

std::string_view ModelName(Model m) {
  return m == Model::kBaseline ? "baseline" : "augmented";
}

Model ParseModel(std::string_view name) {
  if (name == "baseline") return Model::kBaseline;
  if (name == "augmented") return Model::kAugmented;
  throw std::invalid_argument("model must be baseline or augmented, got '" +
                              std::string(name) + "'");
}

std::vector<std::string> StageNames() {
  return {"ingest",
          "train-sentiment",
          "build-salience",
          "style-transfer",
          "augment",
          "train-tokenizer",
          "train-retriever:baseline",
          "train-retriever:augmented",
          "build-index:baseline",
          "build-index:augmented",
          "eval-bias:baseline",
          "eval-bias:augmented",
          "compare"};
}

std::string RetrieverStage(Model m) {
  return "train-retriever:" + std::string(ModelName(m));
}
std::string IndexStage(Model m) {
  return "build-index:" + std::string(ModelName(m));
}
std::string EvalStage(Model m) {
  return "eval-bias:" + std::string(ModelName(m));
}

// ---------------------------------------------------------------- config

PipelineConfig PipelineConfig::FromJson(const json& j,
                                        const fs::path& base_dir) {
  PipelineConfig c;
  std::optional<uint64_t> seed;
  ForEachKey(j, "config", [&](const std::string& key, const json& v) {
    if (key == "paths") {
      ForEachKey(v, "paths", [&](const std::string& k, const json& p) {
        if (k == "corpus") c.paths.corpus = Resolve(p, base_dir);
        else if (k == "sentiment_data") c.paths.sentiment_data = Resolve(p, base_dir);
        else if (k == "lexicon") c.paths.lexicon = Resolve(p, base_dir);
        else if (k == "label_map") c.paths.label_map = Resolve(p, base_dir);
        else if (k == "out_dir") c.paths.out_dir = Resolve(p, base_dir);
        else return false;
        return true;
      });
    } else if (key == "seed") {
      seed = v.get<uint64_t>();
    } else if (key == "sentiment") {
      c.sentiment = SentimentConfig::FromJson(v);
    } else if (key == "styletransfer") {
      c.styletransfer = TransferConfig::FromJson(v);
    } else if (key == "augment") {
      c.augment = AugmentConfig::FromJson(v);
    } else if (key == "tokenizer") {
      ForEachKey(v, "tokenizer", [&](const std::string& k, const json& x) {
        if (k != "vocab_size") return false;
        c.tokenizer.vocab_size = x.get<int>();
        return true;
      });
    } else if (key == "encoder") {
      if (v.contains("vocab_size")) {
        throw std::invalid_argument(
            "encoder.vocab_size is set by the tokenizer; remove it");
      }
      json with_vocab = v;
      with_vocab["vocab_size"] = SubwordVocab::kBaseSize;
      c.encoder = retriever::EncoderConfig::FromJson(with_vocab);
      c.encoder.vocab_size = 0;
    } else if (key == "training") {
      c.training = retriever::TrainConfig::FromJson(v);
    } else if (key == "eval") {
      ForEachKey(v, "eval", [&](const std::string& k, const json& x) {
        if (k != "k") return false;
        c.eval.k = x.get<int>();
        return true;
      });
    } else if (key == "service") {
      ForEachKey(v, "service", [&](const std::string& k, const json& x) {
        if (k == "host") c.service.host = x.get<std::string>();
        else if (k == "port") c.service.port = x.get<int>();
        else if (k == "page_size_cap") c.service.page_size_cap = x.get<int>();
        else return false;
        return true;
      });
    } else {
      return false;
    }
    return true;
  });
  if (seed) c.ApplySeed(*seed);
  return c;
}

PipelineConfig PipelineConfig::Load(const fs::path& path) {
  json j;
  try {
    j = json::parse(ReadFile(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return FromJson(j, fs::absolute(path).parent_path());
}

json PipelineConfig::ToJson() const {
  json enc = encoder.ToJson();
  enc.erase("vocab_size");
  json paths_json = {{"corpus", paths.corpus.string()},
                     {"sentiment_data", paths.sentiment_data.string()},
                     {"out_dir", paths.out_dir.string()}};
  if (!paths.lexicon.empty()) paths_json["lexicon"] = paths.lexicon.string();
  if (!paths.label_map.empty()) paths_json["label_map"] = paths.label_map.string();
  return {{"paths", paths_json},
          {"sentiment", sentiment.ToJson()},
          {"styletransfer", styletransfer.ToJson()},
          {"augment", augment.ToJson()},
          {"tokenizer", {{"vocab_size", tokenizer.vocab_size}}},
          {"encoder", enc},
          {"training", training.ToJson()},
          {"eval", {{"k", eval.k}}},
          {"service",
           {{"host", service.host},
            {"port", service.port},
            {"page_size_cap", service.page_size_cap}}}};
}

void PipelineConfig::ApplySeed(uint64_t seed) {
  sentiment.seed = seed;
  augment.seed = seed;
  training.seed = seed;
}

void PipelineConfig::Validate() const {
  if (paths.out_dir.empty()) throw std::invalid_argument("paths.out_dir is required");
  if (paths.corpus.empty()) throw std::invalid_argument("paths.corpus is required");
  if (paths.sentiment_data.empty()) {
    throw std::invalid_argument("paths.sentiment_data is required");
  }
  if (tokenizer.vocab_size <= SubwordVocab::kBaseSize) {
    throw std::invalid_argument("tokenizer.vocab_size must exceed " +
                                std::to_string(SubwordVocab::kBaseSize));
  }
  if (eval.k < 1) throw std::invalid_argument("eval.k must be >= 1");
  if (service.page_size_cap < 1) {
    throw std::invalid_argument("service.page_size_cap must be >= 1");
  }
  if (service.port < 0 || service.port > 65535) {
    throw std::invalid_argument("service.port out of range");
  }
  styletransfer.Validate();
  training.Validate();
  auto enc = encoder;
  enc.vocab_size = SubwordVocab::kBaseSize + 1;
  enc.Validate();
}

// ---------------------------------------------------------------- lock

OutputLock::OutputLock(const fs::path& out_dir) : path_(out_dir / kLockFile) {
  fs::create_directories(out_dir);
  for (int attempt = 0; attempt < 2; ++attempt) {
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      std::string pid = std::to_string(::getpid()) + "\n";
      if (::write(fd, pid.data(), pid.size()) < 0) {
        ::close(fd);
        throw LockError("cannot write lock file " + path_.string());
      }
      ::close(fd);
      return;
    }
    if (errno != EEXIST) {
      throw LockError("cannot create lock file " + path_.string() + ": " +
                      std::strerror(errno));
    }
    long holder = 0;
    try {
      holder = std::stol(ReadFile(path_));
    } catch (const std::exception&) {
      holder = 0;
    }
    if (holder > 0 && (::kill(static_cast<pid_t>(holder), 0) == 0 || errno == EPERM)) {
      throw LockError("output directory " + out_dir.string() +
                      " is locked by running process " + std::to_string(holder));
    }
    spdlog::warn("removing stale lock file {}", path_.string());
    fs::remove(path_);
  }
  throw LockError("could not acquire " + path_.string());
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

// ---------------------------------------------------------------- workspace

Workspace::Workspace(PipelineConfig config) : config_(std::move(config)) {
  config_.Validate();
  fs::create_directories(config_.paths.out_dir);
}

fs::path Workspace::Artifact(const std::string& relative) const {
  return config_.paths.out_dir / relative;
}

json Workspace::Manifest() const {
  fs::path p = Artifact(kManifest);
  if (!fs::exists(p)) return {{"version", 1}, {"stages", json::object()}};
  return json::parse(ReadFile(p));
}

json Workspace::StageConfig(const std::string& stage) const {
  if (stage == "train-sentiment") return config_.sentiment.ToJson();
  if (stage == "build-salience" || stage == "style-transfer") {
    return config_.styletransfer.ToJson();
  }
  if (stage == "augment") return config_.augment.ToJson();
  if (stage == "train-tokenizer") {
    return {{"vocab_size", config_.tokenizer.vocab_size}};
  }
  if (stage.rfind("train-retriever:", 0) == 0) {
    json enc = config_.encoder.ToJson();
    enc.erase("vocab_size");
    return {{"encoder", enc}, {"training", config_.training.ToJson()}};
  }
  if (stage.rfind("eval-bias:", 0) == 0) return {{"k", config_.eval.k}};
  return json::object();
}

std::vector<std::pair<std::string, fs::path>> Workspace::ExternalInputs(
    const std::string& stage) const {
  std::vector<std::pair<std::string, fs::path>> out;
  if (stage == "ingest") {
    out.emplace_back("corpus", config_.paths.corpus);
    if (!config_.paths.lexicon.empty()) {
      out.emplace_back("lexicon", config_.paths.lexicon);
    }
  } else if (stage == "train-sentiment") {
    out.emplace_back("sentiment_data", config_.paths.sentiment_data);
    if (!config_.paths.label_map.empty()) {
      out.emplace_back("label_map", config_.paths.label_map);
    }
  }
  return out;
}

StageStatus Workspace::Check(const std::string& stage) const {
  StageStatus s{stage, StageStatus::State::kMissing, "never run"};
  json stages = Manifest().at("stages");
  if (!stages.contains(stage)) return s;
  const json& entry = stages.at(stage);
  s.state = StageStatus::State::kStale;
  if (entry.at("config") != StageConfig(stage)) {
    s.reason = "configuration changed";
    return s;
  }
  for (const auto& [rel, sha] : entry.at("outputs").items()) {
    fs::path p = Artifact(rel);
    if (!fs::exists(p)) {
      s.state = StageStatus::State::kMissing;
      s.reason = "artifact " + rel + " is missing";
      return s;
    }
    if (Sha256File(p) != sha.get<std::string>()) {
      s.reason = "artifact " + rel + " was modified";
      return s;
    }
  }
  const json& inputs = entry.at("inputs");
  for (const auto& [name, path] : ExternalInputs(stage)) {
    if (!inputs.contains(name) || !fs::exists(path) ||
        inputs.at(name).at("sha256") != HashPath(path)) {
      s.reason = "input " + name + " (" + path.string() + ") changed";
      return s;
    }
  }
  for (const auto& dep : Deps(stage)) {
    if (!stages.contains(dep) || !inputs.contains(dep) ||
        inputs.at(dep) != stages.at(dep).at("outputs")) {
      s.reason = "upstream stage " + dep + " changed since this stage ran";
      return s;
    }
  }
  s.state = StageStatus::State::kFresh;
  s.reason.clear();
  return s;
}

StageStatus Workspace::Status(const std::string& stage) const {
  Deps(stage);
  auto s = Check(stage);
  if (s.state != StageStatus::State::kFresh) return s;
  for (const auto& dep : Deps(stage)) {
    auto d = Status(dep);
    if (d.state != StageStatus::State::kFresh) {
      return {stage, StageStatus::State::kStale,
              "upstream stage " + dep + " is not fresh"};
    }
  }
  return s;
}

void Workspace::RequireFresh(const std::vector<std::string>& stages) const {
  std::set<std::string> closure;
  std::vector<std::string> todo(stages.begin(), stages.end());
  while (!todo.empty()) {
    std::string s = todo.back();
    todo.pop_back();
    if (!closure.insert(s).second) continue;
    for (const auto& d : Deps(s)) todo.push_back(d);
  }
  for (const auto& stage : StageNames()) {
    if (!closure.count(stage)) continue;
    auto s = Check(stage);
    if (s.state == StageStatus::State::kMissing) {
      throw DependencyError(stage, "missing upstream stage '" + stage +
                                       "' (" + s.reason + "): run `" +
                                       CommandFor(stage) + "` first");
    }
    if (s.state == StageStatus::State::kStale) {
      throw DependencyError(stage, "stale upstream stage '" + stage + "' (" +
                                       s.reason + "): re-run `" +
                                       CommandFor(stage) + "`");
    }
  }
}

void Workspace::Record(const std::string& stage,
                       const std::vector<std::string>& outputs,
                       const json& summary) {
  json manifest = Manifest();
  json& stages = manifest["stages"];
  json entry;
  entry["config"] = StageConfig(stage);
  json inputs = json::object();
  for (const auto& [name, path] : ExternalInputs(stage)) {
    inputs[name] = {{"path", path.string()}, {"sha256", HashPath(path)}};
  }
  for (const auto& dep : Deps(stage)) inputs[dep] = stages.at(dep).at("outputs");
  entry["inputs"] = inputs;
  json out = json::object();
  for (const auto& rel : outputs) out[rel] = Sha256File(Artifact(rel));
  entry["outputs"] = out;
  entry["summary"] = summary;
  stages[stage] = entry;
  fs::path tmp = Artifact(std::string(kManifest) + ".tmp");
  WriteFile(tmp, manifest.dump(2) + "\n");
  fs::rename(tmp, Artifact(kManifest));
  spdlog::info("{}: done", stage);
}

// ---------------------------------------------------------------- loaders

std::vector<Verse> Workspace::LoadVerses() const {
  return ParsePoemsJsonl(ReadFile(Artifact("corpus/verses.jsonl"))).AllVerses();
}

std::vector<VersePair> Workspace::LoadPairs() const {
  return ParsePoemsJsonl(ReadFile(Artifact("corpus/verses.jsonl"))).AllPairs();
}

SentimentModel Workspace::LoadSentiment() const {
  return SentimentModel::Load(Artifact("sentiment/model.json"));
}

MentionLexicon Workspace::LoadLexicon() const {
  return MentionLexicon::LoadFile(Artifact("corpus/lexicon.tsv"));
}

retriever::Retriever Workspace::LoadRetriever(Model m) const {
  return {SubwordVocab::Load(Artifact("tokenizer/vocab.bpe")),
          retriever::ModelParams<float>::Load(
              Artifact("retriever/" + std::string(ModelName(m)) + ".ckpt"))};
}

retriever::VerseIndex Workspace::LoadIndex(Model m) const {
  return retriever::VerseIndex::Load(
      Artifact("index/" + std::string(ModelName(m)) + ".idx"));
}

// ---------------------------------------------------------------- stages

json Workspace::Ingest() {
  spdlog::info("ingest: loading {}", config_.paths.corpus.string());
  if (!fs::exists(config_.paths.corpus)) {
    throw std::invalid_argument("corpus not found: " +
                                config_.paths.corpus.string());
  }
  LoadedCorpus corpus = LoadCorpus(config_.paths.corpus);
  if (corpus.poems.empty()) {
    throw std::invalid_argument("corpus has no poem with two or more verses");
  }
  std::vector<json> rows;
  for (const auto& poem : corpus.poems) {
    for (const auto& v : poem) rows.push_back(VerseToJson(v));
  }
  WriteFile(Artifact("corpus/verses.jsonl"), JsonLines(rows));
  MentionLexicon lexicon = config_.paths.lexicon.empty()
                               ? MentionLexicon::Default()
                               : MentionLexicon::LoadFile(config_.paths.lexicon);
  WriteFile(Artifact("corpus/lexicon.tsv"), lexicon.ToTsv());
  json summary = {{"poems", corpus.poems.size()},
                  {"verses", corpus.NumVerses()},
                  {"pairs", corpus.AllPairs().size()},
                  {"skipped", corpus.skipped}};
  Record("ingest", {"corpus/verses.jsonl", "corpus/lexicon.tsv"}, summary);
  return summary;
}

json Workspace::TrainSentiment() {
  LabelMap labels = config_.paths.label_map.empty()
                        ? LabelMap::Default()
                        : LabelMap::LoadFile(config_.paths.label_map);
  auto data = LoadSentimentDataset(config_.paths.sentiment_data, labels,
                                   config_.sentiment.seed);
  std::vector<LabeledVerse> train, dev, test;
  for (const auto& v : data.verses) {
    (v.split == Split::kTrain ? train : v.split == Split::kDev ? dev : test)
        .push_back(v);
  }
  spdlog::info("train-sentiment: {} train / {} dev / {} test", train.size(),
               dev.size(), test.size());
  SentimentTrainReport report;
  auto model = SentimentModel::Train(train, dev, config_.sentiment, &report);
  model.Save(Artifact("sentiment/model.json"));
  DatasetStats stats = ComputeDatasetStats(data.verses);
  int majority = *std::max_element(stats.counts[2].begin(), stats.counts[2].end());
  json counts = json::object();
  for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
    for (int c = 0; c < kNumPolarityClasses; ++c) {
      counts[std::string(SplitName(s))][std::string(
          LabelName(LabelFromClassIndex(c)))] = stats.counts[static_cast<int>(s)][c];
    }
  }
  json summary = {
      {"excluded", data.excluded},
      {"had_splits", data.had_splits},
      {"counts", counts},
      {"best_epoch", report.best_epoch},
      {"dev_accuracy", report.best_dev_accuracy},
      {"train_accuracy", report.train_accuracy},
      {"test_accuracy", test.empty() ? 0.0 : Accuracy(model, test)},
      {"test_majority_baseline",
       test.empty() ? 0.0 : static_cast<double>(majority) / test.size()}};
  WriteFile(Artifact("sentiment/report.json"), summary.dump(2) + "\n");
  Record("train-sentiment", {"sentiment/model.json", "sentiment/report.json"},
         summary);
  return summary;
}

json Workspace::BuildSalience() {
  RequireFresh(Deps("build-salience"));
  auto model = LoadSentiment();
  std::vector<Tokens> negative, positive;
  for (const auto& v : LoadVerses()) {
    SentimentLabel l = model.Predict(v.text);
    if (l == SentimentLabel::kNegative) negative.push_back(WordTokens(v.text));
    if (l == SentimentLabel::kPositive) positive.push_back(WordTokens(v.text));
  }
  if (negative.empty() || positive.empty()) {
    throw std::runtime_error(
        "build-salience: the classifier found no negative or no positive "
        "verse in the corpus");
  }
  auto table = SalienceTable::Compute(negative, positive, config_.styletransfer);
  WriteFile(Artifact("styletransfer/salience.tsv"), table.ExportTsv());
  long neg_markers = 0, pos_markers = 0;
  for (const auto& [ngram, e] : table.entries()) {
    if (e.salience_negative > config_.styletransfer.threshold) ++neg_markers;
    if (e.salience_positive > config_.styletransfer.threshold) ++pos_markers;
  }
  json summary = {{"negative_verses", negative.size()},
                  {"positive_verses", positive.size()},
                  {"ngrams", table.size()},
                  {"negative_markers", neg_markers},
                  {"positive_markers", pos_markers}};
  Record("build-salience", {"styletransfer/salience.tsv"}, summary);
  return summary;
}

json Workspace::RunStyleTransfer() {
  RequireFresh(Deps("style-transfer"));
  auto model = LoadSentiment();
  auto table =
      SalienceTable::ImportTsv(ReadFile(Artifact("styletransfer/salience.tsv")));
  auto verses = LoadVerses();
  std::vector<MarkedVerse> pool;
  for (const auto& v : verses) {
    if (model.Predict(v.text) == SentimentLabel::kPositive) {
      pool.push_back(DeleteMarkers(WordTokens(v.text), table, Style::kPositive));
    }
  }
  MarkerPool positive_pool(std::move(pool));
  std::vector<json> rows;
  long rewritten = 0, no_op = 0;
  for (const auto& pair : LoadPairs()) {
    const Verse& v = pair.next;
    if (model.Predict(v.text) != SentimentLabel::kNegative) continue;
    TransferResult r = ToPositive(v, table, positive_pool);
    (r.no_op ? no_op : rewritten)++;
    rows.push_back({{"poem_id", v.poem_id},
                    {"position", v.position},
                    {"original", v.text},
                    {"rewritten", r.verse.text},
                    {"no_op", r.no_op}});
  }
  WriteFile(Artifact("styletransfer/rewrites.jsonl"), JsonLines(rows));
  json summary = {{"negative_next_verses", rows.size()},
                  {"rewritten", rewritten},
                  {"no_op", no_op},
                  {"positive_pool", positive_pool.size()}};
  Record("style-transfer", {"styletransfer/rewrites.jsonl"}, summary);
  return summary;
}

json Workspace::Augment() {
  RequireFresh(Deps("augment"));
  auto model = LoadSentiment();
  auto lexicon = LoadLexicon();
  std::map<std::string, std::string> rewrites;
  for (const auto& row : ReadJsonLines(Artifact("styletransfer/rewrites.jsonl"))) {
    if (row.at("no_op").get<bool>()) continue;
    Verse v{row.at("original").get<std::string>(),
            row.at("poem_id").get<std::string>(), row.at("position").get<int>()};
    rewrites[RewriteKey(v)] = row.at("rewritten").get<std::string>();
  }
  AugmentationDeps deps{&model, &lexicon, [&](const Verse& v) -> std::optional<Verse> {
                          auto it = rewrites.find(RewriteKey(v));
                          if (it == rewrites.end()) return std::nullopt;
                          Verse out = v;
                          out.text = it->second;
                          return out;
                        }};
  auto pairs = LoadPairs();
  AugmentedCorpus augmented = AugmentCorpus(pairs, deps, config_.augment);
  std::vector<json> rows;
  for (const auto& e : augmented.examples) rows.push_back(ExampleToJson(e));
  WriteFile(Artifact("augment/examples.jsonl"), JsonLines(rows));
  json report = augmented.report.ToJson();
  WriteFile(Artifact("augment/report.json"), report.dump(2) + "\n");
  WriteFile(Artifact("augment/cells.txt"), augmented.report.cells.ToTable());
  Record("augment",
         {"augment/examples.jsonl", "augment/report.json", "augment/cells.txt"},
         report);
  return report;
}

json Workspace::TrainTokenizer() {
  RequireFresh(Deps("train-tokenizer"));
  std::vector<std::string> text;
  for (const auto& v : LoadVerses()) text.push_back(v.text);
  auto vocab = SubwordVocab::Train(text, config_.tokenizer.vocab_size);
  vocab.Save(Artifact("tokenizer/vocab.bpe"));
  size_t tokens = 0;
  for (const auto& t : text) tokens += vocab.Encode(t).size();
  json summary = {{"vocab_size", vocab.size()},
                  {"merges", vocab.merges().size()},
                  {"mean_tokens_per_verse",
                   static_cast<double>(tokens) / static_cast<double>(text.size())}};
  Record("train-tokenizer", {"tokenizer/vocab.bpe"}, summary);
  return summary;
}

json Workspace::TrainRetriever(Model m) {
  const std::string stage = RetrieverStage(m);
  RequireFresh(Deps(stage));
  auto vocab = SubwordVocab::Load(Artifact("tokenizer/vocab.bpe"));
  std::vector<retriever::TrainRow> rows;
  if (m == Model::kBaseline) {
    for (const auto& p : LoadPairs()) {
      rows.push_back({vocab.Encode(p.input.text), vocab.Encode(p.next.text), {}});
    }
  } else {
    for (const auto& j : ReadJsonLines(Artifact("augment/examples.jsonl"))) {
      auto e = ExampleFromJson(j);
      retriever::TrainRow r{vocab.Encode(e.input.text),
                            vocab.Encode(e.positive.text), {}};
      for (const auto& n : e.hard_negatives) {
        r.hard_negatives.push_back(vocab.Encode(n.text));
      }
      rows.push_back(std::move(r));
    }
  }
  auto encoder = config_.encoder;
  encoder.vocab_size = vocab.size();
  const int every = std::max(1, config_.training.steps / 20);
  auto result = retriever::Train(
      rows, encoder, config_.training, [&](int step, double loss, double rate) {
        if (step % every == 0 || step + 1 == config_.training.steps) {
          spdlog::info("{}: step {} loss {:.4f} lr {}", stage, step, loss, rate);
        }
      });
  const std::string name(ModelName(m));
  result.params.Save(Artifact("retriever/" + name + ".ckpt"));
  json summary = {{"examples", rows.size()},
                  {"parameters", result.params.NumScalars()},
                  {"checkpoint_hash", result.params.Hash()},
                  {"initial_loss", result.loss_curve.empty() ? 0.0 : result.loss_curve.front()},
                  {"final_loss", result.loss_curve.empty() ? 0.0 : result.loss_curve.back()}};
  WriteFile(Artifact("retriever/" + name + ".loss.json"),
            json{{"summary", summary}, {"loss", result.loss_curve}}.dump() + "\n");
  Record(stage, {"retriever/" + name + ".ckpt", "retriever/" + name + ".loss.json"},
         summary);
  return summary;
}

json Workspace::BuildIndex(Model m) {
  const std::string stage = IndexStage(m);
  RequireFresh(Deps(stage));
  auto retriever = LoadRetriever(m);
  std::vector<std::string> pool;
  for (const auto& v : BuildCandidatePool(LoadVerses(), PronounMap::Default())) {
    pool.push_back(v.text);
  }
  auto index = retriever::VerseIndex::Build(std::move(pool), retriever);
  const std::string rel = "index/" + std::string(ModelName(m)) + ".idx";
  index.Save(Artifact(rel));
  json summary = {{"pool", index.size()},
                  {"dim", index.embeddings().cols()},
                  {"checkpoint_hash", index.checkpoint_hash()}};
  Record(stage, {rel}, summary);
  return summary;
}

json Workspace::EvalBias(Model m) {
  const std::string stage = EvalStage(m);
  RequireFresh(Deps(stage));
  auto retriever = LoadRetriever(m);
  auto index = LoadIndex(m);
  auto sentiment = LoadSentiment();
  auto prompts = BuildPrompts(LoadLexicon());
  auto report = EvaluateModel(std::string(ModelName(m)), index, retriever,
                              prompts, config_.eval.k, sentiment);
  const std::string rel = "eval/" + std::string(ModelName(m)) + ".json";
  json j = report.ToJson();
  WriteFile(Artifact(rel), j.dump(2) + "\n");
  json summary = {{"prompts", prompts.size()},
                  {"k", config_.eval.k},
                  {"demographic", j.at("demographic")},
                  {"other", j.at("other")}};
  summary["demographic"].erase("group_means");
  summary["other"].erase("group_means");
  Record(stage, {rel}, summary);
  return summary;
}

json Workspace::CompareModels() {
  RequireFresh(Deps("compare"));
  auto baseline =
      BiasReport::FromJson(json::parse(ReadFile(Artifact("eval/baseline.json"))));
  auto augmented =
      BiasReport::FromJson(json::parse(ReadFile(Artifact("eval/augmented.json"))));
  auto c = Compare(baseline, augmented);
  json j = c.ToJson();
  WriteFile(Artifact("eval/compare.json"), j.dump(2) + "\n");
  WriteFile(Artifact("eval/compare.txt"), c.ToTable());
  json summary = {{"demographic_delta_mean", c.demographic.delta_mean},
                  {"demographic_delta_std", c.demographic.delta_std},
                  {"other_delta_mean", c.other.delta_mean},
                  {"other_delta_std", c.other.delta_std}};
  Record("compare", {"eval/compare.json", "eval/compare.txt"}, summary);
  return summary;
}

json Workspace::RunAll() {
  json out;
  out["ingest"] = Ingest();
  out["train-sentiment"] = TrainSentiment();
  out["build-salience"] = BuildSalience();
  out["style-transfer"] = RunStyleTransfer();
  out["augment"] = Augment();
  out["train-tokenizer"] = TrainTokenizer();
  for (Model m : kModels) out[RetrieverStage(m)] = TrainRetriever(m);
  for (Model m : kModels) out[IndexStage(m)] = BuildIndex(m);
  for (Model m : kModels) out[EvalStage(m)] = EvalBias(m);
  out["compare"] = CompareModels();
  return out;
}

}  // namespace versebias::pipeline
