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


#include "versebias/service.h"

#include <openssl/rand.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <regex>
#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "versebias/hash.h"
#include "versebias/text.h"

namespace versebias::service {

namespace {

using nlohmann::json;

Response Error(int status, std::string code, std::string message) {
  return {status, {{"error", {{"code", std::move(code)}, {"message", std::move(message)}}}}};
}

std::string NewSessionId() {
  unsigned char bytes[16];
  if (RAND_bytes(bytes, sizeof bytes) != 1) {
    throw std::runtime_error("random source unavailable");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id;
  for (unsigned char b : bytes) {
    id.push_back(kHex[b >> 4]);
    id.push_back(kHex[b & 0xf]);
  }
  return id;
}

bool ValidSessionId(const std::string& id) {
  static const std::regex kId("[0-9a-f]{32}");
  return std::regex_match(id, kId);
}

std::string NowUtc() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Reads an optional integer field; false when present but not an integer.
bool IntField(const json& body, const char* key, int& out) {
  if (!body.contains(key)) return true;
  if (!body.at(key).is_number_integer()) return false;
  out = body.at(key).get<int>();
  return true;
}

}  // namespace

std::string_view OriginName(Origin o) {
  switch (o) {
    case Origin::kUser:
      return "user";
    case Origin::kSuggested:
      return "suggested";
    case Origin::kSuggestedModified:
      return "suggested_modified";
  }
  return "user";
}

std::optional<Origin> ParseOrigin(std::string_view name) {
  for (Origin o : {Origin::kUser, Origin::kSuggested, Origin::kSuggestedModified}) {
    if (OriginName(o) == name) return o;
  }
  return std::nullopt;
}

json Session::ToJson() const {
  json rows = json::array();
  for (const auto& v : verses) {
    rows.push_back({{"text", v.text}, {"origin", OriginName(v.origin)}});
  }
  return {{"session_id", id}, {"model", model},     {"verses", rows},
          {"version", version}, {"created", created}, {"updated", updated}};
}

ModelSnapshot MakeSnapshot(std::string tag, retriever::Retriever retriever,
                           retriever::VerseIndex index,
                           const SentimentModel& sentiment) {
  ModelSnapshot s{std::move(tag), std::move(retriever), std::move(index), {}};
  s.labels.reserve(s.index.size());
  for (const auto& v : s.index.verses()) s.labels.push_back(sentiment.Predict(v));
  return s;
}

SuggestionService::SuggestionService(std::vector<ModelSnapshot> models,
                                     std::filesystem::path sessions_dir,
                                     int page_size_cap)
    : models_(std::move(models)),
      sessions_dir_(std::move(sessions_dir)),
      page_size_cap_(page_size_cap) {
  if (models_.empty()) throw std::invalid_argument("service needs a model");
  std::filesystem::create_directories(sessions_dir_);
  std::vector<std::filesystem::path> logs;
  for (const auto& e : std::filesystem::directory_iterator(sessions_dir_)) {
    if (e.path().extension() == ".jsonl") logs.push_back(e.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& log : logs) Replay(log);
}

size_t SuggestionService::num_sessions() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

const ModelSnapshot* SuggestionService::FindModel(const std::string& tag) const {
  for (const auto& m : models_) {
    if (m.tag == tag) return &m;
  }
  return nullptr;
}

void SuggestionService::AppendLog(const std::string& id, const json& event) {
  std::ofstream out(sessions_dir_ / (id + ".jsonl"), std::ios::app);
  out << event.dump() << "\n";
  out.flush();
  if (!out) throw std::runtime_error("cannot persist session " + id);
}

void SuggestionService::Replay(const std::filesystem::path& log) {
  std::string id = log.stem().string();
  if (!ValidSessionId(id)) return;
  std::istringstream in(ReadFile(log));
  Session s;
  s.id = id;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    json e;
    try {
      e = json::parse(line);
    } catch (const json::parse_error&) {
      spdlog::warn("session {}: skipping unreadable log line", id);
      continue;
    }
    const std::string kind = e.value("event", "");
    if (kind == "create") {
      s.model = e.at("model").get<std::string>();
      s.created = s.updated = e.at("at").get<std::string>();
      continue;
    }
    SessionVerse v{e.at("text").get<std::string>(),
                   ParseOrigin(e.at("origin").get<std::string>()).value_or(Origin::kUser)};
    if (kind == "replace_last" && !s.verses.empty()) {
      s.verses.back() = v;
    } else {
      s.verses.push_back(v);
    }
    ++s.version;
    s.updated = e.at("at").get<std::string>();
  }
  if (!s.model.empty()) sessions_[id] = std::move(s);
}

Response SuggestionService::Health() const {
  json tags = json::array();
  for (const auto& m : models_) tags.push_back(m.tag);
  return {200, {{"status", "ok"}, {"models", tags}, {"sessions", num_sessions()}}};
}

Response SuggestionService::Models() const {
  json rows = json::array();
  for (const auto& m : models_) {
    rows.push_back({{"tag", m.tag},
                    {"checkpoint_hash", m.index.checkpoint_hash()},
                    {"pool_size", m.index.size()},
                    {"embedding_dim", m.index.embeddings().cols()}});
  }
  return {200, {{"models", rows}, {"page_size_cap", page_size_cap_}}};
}

Response SuggestionService::CreateSession(const json& body) {
  std::string model = models_.back().tag;
  if (body.contains("model")) {
    if (!body.at("model").is_string()) {
      return Error(400, "invalid_payload", "model must be a string");
    }
    model = body.at("model").get<std::string>();
  }
  if (!FindModel(model)) {
    return Error(400, "unknown_model", "no model tagged '" + model + "'");
  }
  std::vector<SessionVerse> seed;
  if (body.contains("verses")) {
    if (!body.at("verses").is_array()) {
      return Error(400, "invalid_payload", "verses must be an array");
    }
    for (const auto& v : body.at("verses")) {
      std::string text = v.is_string() ? v.get<std::string>()
                         : v.is_object() ? v.value("text", "")
                                         : "";
      auto origin = v.is_object() ? ParseOrigin(v.value("origin", "user"))
                                  : std::optional<Origin>(Origin::kUser);
      text = NormalizeWhitespace(text);
      if (text.empty() || !origin) {
        return Error(400, "invalid_payload", "every seed verse needs text and a valid origin");
      }
      seed.push_back({text, *origin});
    }
  }
  std::lock_guard lock(mu_);
  Session s;
  s.id = NewSessionId();
  s.model = model;
  s.created = s.updated = NowUtc();
  AppendLog(s.id, {{"event", "create"}, {"model", model}, {"at", s.created}});
  for (const auto& v : seed) {
    AppendLog(s.id, {{"event", "append"},
                     {"text", v.text},
                     {"origin", OriginName(v.origin)},
                     {"at", s.updated}});
    s.verses.push_back(v);
    ++s.version;
  }
  json out = s.ToJson();
  sessions_[s.id] = std::move(s);
  return {201, out};
}

Response SuggestionService::GetSession(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    return Error(404, "session_not_found", "no session " + id);
  }
  return {200, it->second.ToJson()};
}

Response SuggestionService::AppendVerse(const std::string& id, const json& body) {
  if (!body.contains("text") || !body.at("text").is_string()) {
    return Error(400, "invalid_payload", "text (string) is required");
  }
  std::string text = NormalizeWhitespace(body.at("text").get<std::string>());
  if (text.empty()) return Error(400, "invalid_payload", "text is empty");
  auto origin = ParseOrigin(body.value("origin", "user"));
  if (!origin) {
    return Error(400, "invalid_payload",
                 "origin must be user, suggested or suggested_modified");
  }
  if (!body.contains("version") || !body.at("version").is_number_integer()) {
    return Error(400, "invalid_payload", "version (integer) is required");
  }
  bool replace_last = body.value("replace_last", false);
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    return Error(404, "session_not_found", "no session " + id);
  }
  Session& s = it->second;
  if (body.at("version").get<int64_t>() != s.version) {
    Response r = Error(409, "version_conflict",
                       "session is at version " + std::to_string(s.version));
    r.body["session"] = s.ToJson();
    return r;
  }
  if (replace_last && s.verses.empty()) {
    return Error(400, "invalid_payload", "no verse to replace");
  }
  s.updated = NowUtc();
  AppendLog(id, {{"event", replace_last ? "replace_last" : "append"},
                 {"text", text},
                 {"origin", OriginName(*origin)},
                 {"at", s.updated}});
  if (replace_last) {
    s.verses.back() = {text, *origin};
  } else {
    s.verses.push_back({text, *origin});
  }
  ++s.version;
  return {200, s.ToJson()};
}

Response SuggestionService::Suggest(const std::string& id, const json& body) {
  int n = 10, offset = 0;
  if (!IntField(body, "n", n) || !IntField(body, "offset", offset)) {
    return Error(400, "invalid_payload", "n and offset must be integers");
  }
  if (n < 1 || n > page_size_cap_) {
    return Error(400, "invalid_page",
                 "n must be in [1, " + std::to_string(page_size_cap_) + "]");
  }
  if (offset < 0) return Error(400, "invalid_page", "offset must be >= 0");
  std::string input, model;
  {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
      return Error(404, "session_not_found", "no session " + id);
    }
    if (it->second.verses.empty()) {
      return Error(400, "empty_session", "append a verse before asking for suggestions");
    }
    input = it->second.verses.back().text;
    model = it->second.model;
  }
  const ModelSnapshot* snap = FindModel(model);
  json rows = json::array();
  for (const auto& s : snap->index.Suggest(snap->retriever, input, n, offset)) {
    SentimentLabel label = snap->labels[s.index];
    rows.push_back({{"rank", s.rank + 1},
                    {"verse", s.verse},
                    {"score", s.score},
                    {"sentiment", NumericScore(label)},
                    {"label", LabelName(label)}});
  }
  return {200,
          {{"session_id", id},
           {"model", model},
           {"input", input},
           {"n", n},
           {"offset", offset},
           {"suggestions", rows}}};
}

Response SuggestionService::Handle(const std::string& method,
                                   const std::string& path,
                                   const std::string& body) {
  static const std::regex kSession(R"(/sessions/([^/]+))");
  static const std::regex kVerses(R"(/sessions/([^/]+)/verses)");
  static const std::regex kSuggest(R"(/sessions/([^/]+)/suggest)");
  json payload = json::object();
  if (method == "POST" && !body.empty()) {
    try {
      payload = json::parse(body);
    } catch (const json::parse_error& e) {
      return Error(400, "invalid_json", e.what());
    }
    if (!payload.is_object()) {
      return Error(400, "invalid_payload", "body must be a JSON object");
    }
  }
  std::smatch m;
  auto only = [&](const char* allowed) -> std::optional<Response> {
    if (method == allowed) return std::nullopt;
    return Error(405, "method_not_allowed", method + " not allowed on " + path);
  };
  try {
    if (path == "/health") return only("GET").value_or(Health());
    if (path == "/models") return only("GET").value_or(Models());
    if (path == "/sessions") {
      if (auto e = only("POST")) return *e;
      return CreateSession(payload);
    }
    if (std::regex_match(path, m, kVerses)) {
      if (auto e = only("POST")) return *e;
      return AppendVerse(m[1], payload);
    }
    if (std::regex_match(path, m, kSuggest)) {
      if (auto e = only("POST")) return *e;
      return Suggest(m[1], payload);
    }
    if (std::regex_match(path, m, kSession)) {
      if (auto e = only("GET")) return *e;
      return GetSession(m[1]);
    }
  } catch (const nlohmann::json::exception& e) {
    return Error(400, "invalid_payload", e.what());
  } catch (const std::exception& e) {
    spdlog::error("{} {}: {}", method, path, e.what());
    return Error(500, "internal", e.what());
  }
  return Error(404, "not_found", "no route for " + path);
}

void SuggestionService::Mount(httplib::Server& server) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    Response r = Handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
  server.Put(".*", handler);
  server.Delete(".*", handler);
  server.Patch(".*", handler);
}

std::vector<ModelSnapshot> LoadSnapshots(const pipeline::Workspace& ws) {
  ws.RequireFresh({"train-sentiment"});
  auto sentiment = ws.LoadSentiment();
  std::vector<ModelSnapshot> out;
  std::string last_error;
  for (auto m : pipeline::kModels) {
    try {
      ws.RequireFresh({pipeline::IndexStage(m)});
    } catch (const pipeline::DependencyError& e) {
      spdlog::warn("skipping {} model: {}", pipeline::ModelName(m), e.what());
      last_error = e.what();
      continue;
    }
    out.push_back(MakeSnapshot(std::string(pipeline::ModelName(m)),
                               ws.LoadRetriever(m), ws.LoadIndex(m), sentiment));
  }
  if (out.empty()) throw pipeline::DependencyError("build-index", last_error);
  return out;
}

int RunServer(const pipeline::Workspace& ws) {
  const auto& cfg = ws.config().service;
  SuggestionService service(LoadSnapshots(ws), ws.Artifact("sessions"),
                            cfg.page_size_cap);
  httplib::Server server;
  service.Mount(server);
  spdlog::info("serving {} session(s) on http://{}:{}", service.num_sessions(),
               cfg.host, cfg.port);
  if (!server.listen(cfg.host, cfg.port)) {
    throw std::runtime_error("cannot listen on " + cfg.host + ":" +
                             std::to_string(cfg.port));
  }
  return 0;
}

}  // namespace versebias::service
