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


// HTTP composition service: sessions of accepted verses and ranked next-verse
// suggestions with sentiment labels, over immutable model snapshots.
//
//   GET  /health
//   GET  /models
//   POST /sessions                    {"model": "augmented", "verses": [...]}
//   GET  /sessions/{id}
//   POST /sessions/{id}/verses        {"text", "origin", "version", "replace_last"}
//   POST /sessions/{id}/suggest       {"n", "offset"}
//
// Every body is JSON; errors are {"error": {"code", "message"}}.

#ifndef VERSEBIAS_SERVICE_H_
#define VERSEBIAS_SERVICE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "versebias/pipeline.h"
#include "versebias/retriever/index.h"
#include "versebias/sentiment.h"

namespace httplib {
class Server;
}

namespace versebias::service {

struct ModelSnapshot {
  std::string tag;
  retriever::Retriever retriever;
  retriever::VerseIndex index;
  std::vector<SentimentLabel> labels;  // one per pool verse
};

// Classifies every pool verse once.
ModelSnapshot MakeSnapshot(std::string tag, retriever::Retriever retriever,
                           retriever::VerseIndex index,
                           const SentimentModel& sentiment);

enum class Origin { kUser, kSuggested, kSuggestedModified };
std::string_view OriginName(Origin o);
std::optional<Origin> ParseOrigin(std::string_view name);

struct SessionVerse {
  std::string text;
  Origin origin = Origin::kUser;
};

struct Session {
  std::string id;
  std::string model;
  std::vector<SessionVerse> verses;
  int64_t version = 0;  // bumped by every write
  std::string created;
  std::string updated;

  nlohmann::json ToJson() const;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

class SuggestionService {
 public:
  // Replays every session log found in `sessions_dir`.
  SuggestionService(std::vector<ModelSnapshot> models,
                    std::filesystem::path sessions_dir, int page_size_cap);

  Response Handle(const std::string& method, const std::string& path,
                  const std::string& body);

  // Routes every request on `server` through Handle.
  void Mount(httplib::Server& server);

  size_t num_sessions() const;

 private:
  Response CreateSession(const nlohmann::json& body);
  Response GetSession(const std::string& id);
  Response AppendVerse(const std::string& id, const nlohmann::json& body);
  Response Suggest(const std::string& id, const nlohmann::json& body);
  Response Health() const;
  Response Models() const;

  const ModelSnapshot* FindModel(const std::string& tag) const;
  void AppendLog(const std::string& id, const nlohmann::json& event);
  void Replay(const std::filesystem::path& log);

  std::vector<ModelSnapshot> models_;
  std::filesystem::path sessions_dir_;
  int page_size_cap_;
  mutable std::mutex mu_;
  std::map<std::string, Session> sessions_;
};

// Loads the snapshot of every model whose index is fresh. Throws
// pipeline::DependencyError when none is.
std::vector<ModelSnapshot> LoadSnapshots(const pipeline::Workspace& ws);

// Serves `ws` on the configured host and port until the process is stopped.
int RunServer(const pipeline::Workspace& ws);

}  // namespace versebias::service

#endif  // VERSEBIAS_SERVICE_H_
