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


// End-to-end pipeline over one output directory: a JSON config, one function
// per stage, and a manifest that records every stage's inputs and outputs by
// SHA-256 so that downstream stages refuse missing or stale artifacts.

#ifndef VERSEBIAS_PIPELINE_H_
#define VERSEBIAS_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "versebias/augment.h"
#include "versebias/retriever/index.h"
#include "versebias/retriever/trainer.h"
#include "versebias/sentiment.h"
#include "versebias/styletransfer.h"

namespace versebias::pipeline {

namespace fs = std::filesystem;

enum class Model { kBaseline, kAugmented };
std::string_view ModelName(Model m);
// Throws std::invalid_argument for anything but "baseline"/"augmented".
Model ParseModel(std::string_view name);
inline constexpr Model kModels[] = {Model::kBaseline, Model::kAugmented};

struct Paths {
  fs::path corpus;
  fs::path sentiment_data;
  fs::path lexicon;    // empty: built-in lexicon
  fs::path label_map;  // empty: -1/0/1/2 encoding
  fs::path out_dir;
};

struct TokenizerSettings {
  int vocab_size = 1000;
};

struct EvalSettings {
  int k = 50;
};

struct ServiceSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  int page_size_cap = 50;
};

struct PipelineConfig {
  Paths paths;
  SentimentConfig sentiment;
  TransferConfig styletransfer;
  AugmentConfig augment;
  TokenizerSettings tokenizer;
  // vocab_size is filled in from the trained tokenizer.
  retriever::EncoderConfig encoder;
  retriever::TrainConfig training;
  EvalSettings eval;
  ServiceSettings service;

  // Relative paths resolve against `base_dir`. Unknown keys anywhere throw
  // std::invalid_argument.
  static PipelineConfig FromJson(const nlohmann::json& j,
                                 const fs::path& base_dir);
  static PipelineConfig Load(const fs::path& path);
  nlohmann::json ToJson() const;

  // Sets every module seed (sentiment split and training, augmentation
  // draws, retriever init/order/dropout).
  void ApplySeed(uint64_t seed);
  void Validate() const;
};

// Raised when a stage's upstream artifacts are missing or stale.
class DependencyError : public std::runtime_error {
 public:
  DependencyError(std::string stage, const std::string& message)
      : std::runtime_error(message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Raised when another process holds the output directory.
class LockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exclusive writer lock on an output directory, released on destruction. A
// lock file left by a dead process is reclaimed.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& out_dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

// Stage names as recorded in the manifest, in pipeline order.
std::vector<std::string> StageNames();
std::string RetrieverStage(Model m);
std::string IndexStage(Model m);
std::string EvalStage(Model m);

struct StageStatus {
  std::string stage;
  enum class State { kMissing, kStale, kFresh } state = State::kMissing;
  std::string reason;
};

class Workspace {
 public:
  explicit Workspace(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  fs::path Artifact(const std::string& relative) const;

  // Each stage checks its upstream stages, writes its artifacts and records
  // them in the manifest. The returned JSON is the stage summary.
  nlohmann::json Ingest();
  nlohmann::json TrainSentiment();
  nlohmann::json BuildSalience();
  nlohmann::json RunStyleTransfer();
  nlohmann::json Augment();
  nlohmann::json TrainTokenizer();
  nlohmann::json TrainRetriever(Model m);
  nlohmann::json BuildIndex(Model m);
  nlohmann::json EvalBias(Model m);
  nlohmann::json CompareModels();
  // Every stage in order.
  nlohmann::json RunAll();

  // Throws DependencyError naming the earliest missing or stale stage.
  void RequireFresh(const std::vector<std::string>& stages) const;
  StageStatus Status(const std::string& stage) const;
  nlohmann::json Manifest() const;

  // Loaded artifacts (after RequireFresh).
  SentimentModel LoadSentiment() const;
  MentionLexicon LoadLexicon() const;
  retriever::Retriever LoadRetriever(Model m) const;
  retriever::VerseIndex LoadIndex(Model m) const;

 private:
  nlohmann::json StageConfig(const std::string& stage) const;
  std::vector<std::pair<std::string, fs::path>> ExternalInputs(
      const std::string& stage) const;
  void Record(const std::string& stage,
              const std::vector<std::string>& outputs,
              const nlohmann::json& summary);
  StageStatus Check(const std::string& stage) const;
  std::vector<Verse> LoadVerses() const;
  std::vector<VersePair> LoadPairs() const;

  PipelineConfig config_;
};

}  // namespace versebias::pipeline

#endif  // VERSEBIAS_PIPELINE_H_
