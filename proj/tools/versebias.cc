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


// versebias: command-line driver for the verse suggestion pipeline.
//
// Exit status: 0 success, 1 runtime failure, 2 bad usage or config,
// 3 missing or stale upstream stage, 4 output directory locked.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "versebias/bias_eval.h"
#include "versebias/hash.h"
#include "versebias/pipeline.h"
#include "versebias/service.h"

namespace {

using namespace versebias;
using namespace versebias::pipeline;
using nlohmann::json;

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;
constexpr int kDependencyError = 3;
constexpr int kLockedError = 4;

void SetUpLogging() {
  auto logger = spdlog::stderr_color_mt("versebias");
  logger->set_pattern("[%H:%M:%S] [%^%l%$] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("VERSEBIAS_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

void Print(const json& j) { std::cout << j.dump(2) << "\n"; }

std::vector<Model> ModelsFor(const std::string& which) {
  if (which == "all") return {Model::kBaseline, Model::kAugmented};
  return {ParseModel(which)};
}

}  // namespace

int main(int argc, char** argv) {
  SetUpLogging();
  CLI::App app{"Verse suggestion pipeline with sentiment-bias augmentation"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out_dir;
  app.add_option("-c,--config", config_path, "Pipeline config (JSON)")
      ->envname("VERSEBIAS_CONFIG")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override every module seed");
  app.add_option("--out", out_dir, "Override the output directory");

  auto* ingest = app.add_subcommand("ingest", "Load and normalize the poem corpus");
  auto* sentiment = app.add_subcommand("train-sentiment", "Train the verse sentiment classifier");
  auto* salience = app.add_subcommand("build-salience", "Compute n-gram salience over the corpus");
  auto* transfer = app.add_subcommand("style-transfer", "Rewrite negative next verses to positive");
  auto* augment = app.add_subcommand("augment", "Build the augmented training examples");
  auto* tokenizer = app.add_subcommand("train-tokenizer", "Learn the subword vocabulary");
  std::optional<int> vocab_size;
  tokenizer->add_option("--vocab-size", vocab_size, "Target vocabulary size");

  auto* train = app.add_subcommand("train-retriever", "Train a dual-encoder retriever");
  std::string train_model;
  std::optional<int> steps;
  train->add_option("model", train_model, "baseline or augmented")
      ->required()
      ->check(CLI::IsMember({"baseline", "augmented"}));
  train->add_option("--steps", steps, "Override training steps");

  auto* index = app.add_subcommand("build-index", "Embed the suggestion pool");
  std::string index_model = "all";
  index->add_option("model", index_model, "baseline, augmented or all")
      ->check(CLI::IsMember({"baseline", "augmented", "all"}));

  auto* suggest = app.add_subcommand("suggest", "Print ranked next-verse suggestions");
  std::string suggest_model = "augmented";
  std::string input;
  int n = 10;
  int offset = 0;
  bool as_json = false;
  suggest->add_option("--model", suggest_model, "baseline or augmented")
      ->check(CLI::IsMember({"baseline", "augmented"}));
  suggest->add_option("--input", input, "Previous verse")->required();
  suggest->add_option("--n", n, "Number of suggestions")->check(CLI::PositiveNumber);
  suggest->add_option("--offset", offset, "Skip this many ranks")->check(CLI::NonNegativeNumber);
  suggest->add_flag("--json", as_json, "Print JSON");

  auto* eval = app.add_subcommand("eval-bias", "Score suggestions for group prompts");
  std::string eval_model = "all";
  std::optional<int> k;
  eval->add_option("model", eval_model, "baseline, augmented or all")
      ->check(CLI::IsMember({"baseline", "augmented", "all"}));
  eval->add_option("--k", k, "Suggestions per prompt");

  auto* compare = app.add_subcommand("compare", "Compare baseline and augmented bias reports");
  auto* serve = app.add_subcommand("serve", "Run the HTTP suggestion service");
  std::optional<int> port;
  std::optional<std::string> host;
  serve->add_option("--port", port, "Listen port");
  serve->add_option("--host", host, "Listen address");

  auto* all = app.add_subcommand("pipeline", "Run every stage from ingest to compare");
  auto* status = app.add_subcommand("status", "Show the freshness of every stage");

  CLI11_PARSE(app, argc, argv);

  try {
    if (config_path.empty()) {
      throw std::invalid_argument("--config is required (or set VERSEBIAS_CONFIG)");
    }
    PipelineConfig config = PipelineConfig::Load(config_path);
    if (seed) config.ApplySeed(*seed);
    if (!out_dir.empty()) config.paths.out_dir = std::filesystem::absolute(out_dir);
    if (vocab_size) config.tokenizer.vocab_size = *vocab_size;
    if (steps) config.training.steps = *steps;
    if (k) config.eval.k = *k;
    if (port) config.service.port = *port;
    if (host) config.service.host = *host;
    Workspace ws(config);

    if (*status) {
      for (const auto& stage : StageNames()) {
        auto s = ws.Status(stage);
        const char* state = s.state == StageStatus::State::kFresh   ? "fresh"
                            : s.state == StageStatus::State::kStale ? "stale"
                                                                    : "missing";
        std::cout << stage << "\t" << state
                  << (s.reason.empty() ? "" : "\t" + s.reason) << "\n";
      }
      return 0;
    }
    if (*suggest) {
      Model m = ParseModel(suggest_model);
      ws.RequireFresh({IndexStage(m), "train-sentiment"});
      auto retriever = ws.LoadRetriever(m);
      auto idx = ws.LoadIndex(m);
      auto model = ws.LoadSentiment();
      auto results = idx.Suggest(retriever, input, n, offset);
      json rows = json::array();
      for (const auto& s : results) {
        auto label = model.Predict(s.verse);
        if (as_json) {
          rows.push_back({{"rank", s.rank + 1},
                          {"verse", s.verse},
                          {"score", s.score},
                          {"sentiment", NumericScore(label)}});
        } else {
          std::printf("%3d  %+8.4f  %-9s  %s\n", s.rank + 1, s.score,
                      std::string(LabelName(label)).c_str(), s.verse.c_str());
        }
      }
      if (as_json) Print(rows);
      return 0;
    }
    if (*serve) {
      return service::RunServer(ws);
    }

    OutputLock lock(config.paths.out_dir);
    if (*ingest) Print(ws.Ingest());
    if (*sentiment) Print(ws.TrainSentiment());
    if (*salience) Print(ws.BuildSalience());
    if (*transfer) Print(ws.RunStyleTransfer());
    if (*augment) Print(ws.Augment());
    if (*tokenizer) Print(ws.TrainTokenizer());
    if (*train) Print(ws.TrainRetriever(ParseModel(train_model)));
    if (*index) {
      for (Model m : ModelsFor(index_model)) Print(ws.BuildIndex(m));
    }
    if (*eval) {
      for (Model m : ModelsFor(eval_model)) Print(ws.EvalBias(m));
    }
    if (*compare) {
      ws.CompareModels();
      std::cout << ReadFile(ws.Artifact("eval/compare.txt"));
    }
    if (*all) {
      ws.RunAll();
      std::cout << ReadFile(ws.Artifact("eval/compare.txt"));
    }
    return 0;
  } catch (const DependencyError& e) {
    spdlog::error("{}", e.what());
    return kDependencyError;
  } catch (const LockError& e) {
    spdlog::error("{}", e.what());
    return kLockedError;
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kRuntimeError;
  }
}
