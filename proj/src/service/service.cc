/*
 * Copyright 2026 The NTL Workbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ntlwb/service/service.h"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <map>
#include <random>
#include <shared_mutex>
#include <utility>

#include "httplib.h"
#include "ntlwb/data/csv.h"
#include "ntlwb/data/split.h"
#include "ntlwb/data/synth.h"
#include "ntlwb/loop/journal.h"
#include "ntlwb/loop/json.h"
#include "ntlwb/util/text.h"

namespace ntlwb::service {
namespace {

using loop::Json;

// Errors that are not library errors.
struct HttpError {
  int status;
  std::string code;
  std::string message;
  Json detail = Json::object();
};

std::string NowUtc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

void Reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response& res, int status, std::string_view code,
                const std::string& message, Json detail) {
  Reply(res, status,
        Json{{"v", loop::kWireVersion},
             {"error_code", code},
             {"message", message},
             {"detail", std::move(detail)}});
}

Json ParseBody(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    throw HttpError{400, "bad_request", "request body is not valid JSON", {{"parser", e.what()}}};
  }
}

std::size_t ParseIndex(const std::string& text, const char* what, int status) {
  const auto value = ParseInt(text);
  if (!value || *value < 0) {
    throw HttpError{status, "bad_index", std::string(what) + " must be a non-negative integer",
                    {{"value", text}}};
  }
  return static_cast<std::size_t>(*value);
}

struct SessionEntry {
  std::string id;
  std::string created_at;
  std::string dataset_ref;
  std::mutex writer;
  std::shared_mutex state_mutex;
  std::unique_ptr<loop::JournaledSession> session;
};

}  // namespace

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadIndex:
      return 404;
    case ErrorCode::kIo:
    case ErrorCode::kTrainingFailure:
    case ErrorCode::kCorruptJournal:
    case ErrorCode::kCorruptModel:
    case ErrorCode::kVersionMismatch:
      return 500;
    default:
      return 422;
  }
}

struct Service::Impl {
  explicit Impl(ServiceOptions opts) : options(std::move(opts)), rng(std::random_device{}()) {}

  ServiceOptions options;
  httplib::Server server;
  mutable std::shared_mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<SessionEntry>> sessions;
  std::mutex id_mutex;
  std::mt19937_64 rng;
  std::size_t next_serial = 1;

  std::filesystem::path SessionsDir() const { return options.data_dir / "sessions"; }

  std::shared_ptr<SessionEntry> Find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex);
    const auto it = sessions.find(id);
    if (it == sessions.end()) {
      throw HttpError{404, "unknown_session", "no session '" + id + "'", {{"session_id", id}}};
    }
    return it->second;
  }

  std::string NewId() {
    std::lock_guard lock(id_mutex);
    for (;;) {
      char id[40];
      std::snprintf(id, sizeof id, "s%04zu-%08llx", next_serial++,
                    static_cast<unsigned long long>(rng() & 0xffffffffULL));
      std::shared_lock read(sessions_mutex);
      if (!sessions.contains(id) && !std::filesystem::exists(SessionsDir() / id)) return id;
    }
  }

  loop::JournalOptions JournalOptionsFor(const std::string& dataset_ref) const {
    loop::JournalOptions journal;
    journal.deterministic = options.deterministic;
    journal.dataset_ref = dataset_ref;
    return journal;
  }

  void Restore() {
    const auto dir = SessionsDir();
    if (!std::filesystem::exists(dir)) return;
    for (const auto& child : std::filesystem::directory_iterator(dir)) {
      const auto journal = child.path() / "journal.jsonl";
      if (!std::filesystem::exists(journal)) continue;
      try {
        auto entry = std::make_shared<SessionEntry>();
        entry->id = child.path().filename().string();
        entry->session = std::make_unique<loop::JournaledSession>(
            loop::JournaledSession::Load(journal, JournalOptionsFor({})));
        std::ifstream in(journal);
        std::string first;
        std::getline(in, first);
        const auto record = Json::parse(first);
        entry->created_at = record.value("ts", std::string());
        entry->dataset_ref = record["payload"].value("dataset_ref", std::string());
        sessions[entry->id] = std::move(entry);
      } catch (const std::exception& e) {
        std::cerr << "skipping session " << child.path().string() << ": " << e.what() << "\n";
      }
    }
  }

  Json SessionJson(const SessionEntry& entry) const {
    const auto& state = entry.session->state();
    return Json{{"v", loop::kWireVersion},
                {"session_id", entry.id},
                {"created_at", entry.created_at},
                {"dataset_ref", entry.dataset_ref},
                {"provenance", state.dataset().provenance()},
                {"rows", state.dataset().num_rows()},
                {"config", loop::ToJson(state.config())},
                {"snapshot", loop::SnapshotToJson(state)}};
  }

  // POST /sessions
  void CreateSession(const httplib::Request& req, httplib::Response& res) {
    const Json body = ParseBody(req);
    if (!body.is_object()) throw HttpError{422, "invalid_argument", "body must be an object"};
    const auto config = loop::LoopConfigFromJson(body.value("config", Json::object()));
    const std::string id = NewId();
    const auto dir = SessionsDir() / id;
    std::filesystem::create_directories(dir);

    std::string dataset_ref;
    std::shared_ptr<const data::FeatureTable> table;
    const int sources = static_cast<int>(body.contains("dataset")) +
                        static_cast<int>(body.contains("csv")) +
                        static_cast<int>(body.contains("synthetic"));
    if (sources != 1) {
      std::filesystem::remove_all(dir);
      throw HttpError{422, "invalid_argument",
                      "give exactly one of 'dataset', 'csv' or 'synthetic'"};
    }
    try {
      if (body.contains("dataset")) {
        if (!body["dataset"].is_string()) {
          throw HttpError{422, "invalid_argument", "'dataset' must be a path string"};
        }
        const std::filesystem::path rel(body["dataset"].get<std::string>());
        for (const auto& part : rel) {
          if (part == "..") {
            throw HttpError{422, "invalid_argument", "dataset path must stay inside the data dir"};
          }
        }
        const auto path = rel.is_absolute() ? rel : options.data_dir / rel;
        if (!std::filesystem::exists(path)) {
          throw HttpError{422, "io", "dataset '" + rel.string() + "' not found",
                          {{"dataset", rel.string()}}};
        }
        dataset_ref = std::filesystem::absolute(path).string();
        table = std::make_shared<const data::FeatureTable>(data::LoadCsv(path));
      } else if (body.contains("csv")) {
        if (!body["csv"].is_string()) {
          throw HttpError{422, "invalid_argument", "'csv' must be a string"};
        }
        const auto path = dir / "dataset.csv";
        data::WriteFile(path, body["csv"].get<std::string>());
        dataset_ref = std::filesystem::absolute(path).string();
        table = std::make_shared<const data::FeatureTable>(data::LoadCsv(path));
      } else {
        const auto& s = body["synthetic"];
        if (!s.is_object()) throw HttpError{422, "invalid_argument", "'synthetic' must be an object"};
        data::SynthConfig synth;
        try {
          synth.n_customers = s.value("customers", synth.n_customers);
          synth.ntl_rate = s.value("ntl_rate", synth.ntl_rate);
          synth.plant_outlier = s.value("outlier", synth.plant_outlier);
          synth.seed = s.value("seed", synth.seed);
        } catch (const nlohmann::json::exception&) {
          throw HttpError{422, "invalid_argument", "'synthetic' fields have the wrong type"};
        }
        data::SplitSpec split;
        split.seed = synth.seed;
        const auto generated = data::GenerateSplitSynthetic(synth, split);
        const auto path = dir / "dataset.csv";
        data::WriteCsv(generated.table, path, true);
        data::WriteFile(dir / "dataset.manifest", generated.manifest.Format());
        dataset_ref = std::filesystem::absolute(path).string();
        // Reload so a restored session sees the same provenance.
        table = std::make_shared<const data::FeatureTable>(data::LoadCsv(path));
      }
      if (body.contains("split")) {
        const auto& sp = body["split"];
        data::SplitSpec split;
        split.seed = sp.is_object() ? sp.value("seed", split.seed) : split.seed;
        const auto path = dir / "dataset.csv";
        data::WriteCsv(data::StratifiedSplit(*table, split), path, true);
        dataset_ref = std::filesystem::absolute(path).string();
        table = std::make_shared<const data::FeatureTable>(data::LoadCsv(path));
      }

      auto entry = std::make_shared<SessionEntry>();
      entry->id = id;
      entry->created_at = NowUtc();
      entry->dataset_ref = dataset_ref;
      entry->session = std::make_unique<loop::JournaledSession>(loop::JournaledSession::Start(
          dir / "journal.jsonl", table, config, JournalOptionsFor(dataset_ref)));
      {
        std::unique_lock lock(sessions_mutex);
        sessions[id] = entry;
      }
      std::shared_lock read(entry->state_mutex);
      Reply(res, 201, SessionJson(*entry));
    } catch (...) {
      std::filesystem::remove_all(dir);
      throw;
    }
  }

  // POST /sessions/{id}/iterations
  void RunIteration(const std::string& id, httplib::Response& res) {
    const auto entry = Find(id);
    std::unique_lock writer(entry->writer, std::try_to_lock);
    if (!writer.owns_lock()) throw Busy(id);
    loop::IterationRecord prepared;
    {
      std::shared_lock read(entry->state_mutex);
      prepared = entry->session->Evaluate(entry->session->Fit());
    }
    std::unique_lock write(entry->state_mutex);
    const auto& record = entry->session->Commit(std::move(prepared));
    const auto& state = entry->session->state();
    Reply(res, 201,
          Json{{"v", loop::kWireVersion},
               {"units", "kWh"},
               {"session_id", id},
               {"cursor", state.cursor() ? Json(*state.cursor()) : Json(nullptr)},
               {"iteration", loop::ToJson(record)},
               {"snapshot", loop::SnapshotToJson(state)}});
  }

  // POST /sessions/{id}/actions
  void ApplyAction(const std::string& id, const httplib::Request& req, httplib::Response& res) {
    const auto entry = Find(id);
    const Json body = ParseBody(req);
    const auto action = loop::ActionFromJson(body);
    std::unique_lock writer(entry->writer, std::try_to_lock);
    if (!writer.owns_lock()) throw Busy(id);
    std::unique_lock write(entry->state_mutex);
    entry->session->Apply(action);
    const auto& state = entry->session->state();
    Reply(res, 200,
          Json{{"v", loop::kWireVersion},
               {"session_id", id},
               {"action", loop::ToJson(action)},
               {"cursor", state.cursor() ? Json(*state.cursor()) : Json(nullptr)},
               {"snapshot", loop::SnapshotToJson(state)}});
  }

  void GetIteration(const std::string& id, const std::string& n, httplib::Response& res) {
    const auto entry = Find(id);
    const std::size_t index = ParseIndex(n, "iteration", 404);
    std::shared_lock read(entry->state_mutex);
    const auto& record = entry->session->state().iteration(index);
    Reply(res, 200,
          Json{{"v", loop::kWireVersion},
               {"units", "kWh"},
               {"session_id", id},
               {"iteration", loop::ToJson(record)}});
  }

  void GetShap(const std::string& id, const std::string& n, const httplib::Request& req,
               httplib::Response& res) {
    const auto entry = Find(id);
    const std::size_t index = ParseIndex(n, "iteration", 404);
    const std::string scope = req.has_param("scope") ? req.get_param_value("scope") : "global";
    if (scope != "global" && scope != "topk") {
      throw HttpError{422, "invalid_argument", "scope must be 'global' or 'topk'",
                      {{"scope", scope}}};
    }
    std::optional<std::size_t> limit;
    if (req.has_param("k")) {
      const auto k = ParseInt(req.get_param_value("k"));
      if (!k || *k <= 0) {
        throw HttpError{422, "invalid_argument", "k must be a positive integer",
                        {{"k", req.get_param_value("k")}}};
      }
      limit = static_cast<std::size_t>(*k);
    }
    std::shared_lock read(entry->state_mutex);
    const auto& record = entry->session->state().iteration(index);
    const auto& summary = scope == "global" ? *record.global_summary : *record.top_k_summary;
    Json body = loop::SummaryToJson(summary, scope, scope == "topk" ? limit : std::nullopt);
    body["session_id"] = id;
    body["iteration"] = index;
    Reply(res, 200, body);
  }

  void GetHistory(const std::string& id, httplib::Response& res) {
    const auto entry = Find(id);
    std::shared_lock read(entry->state_mutex);
    const auto& state = entry->session->state();
    Json iterations = Json::array();
    for (const auto& record : state.iterations()) iterations.push_back(loop::ToJson(record));
    Reply(res, 200,
          Json{{"v", loop::kWireVersion},
               {"units", "kWh"},
               {"session_id", id},
               {"cursor", state.cursor() ? Json(*state.cursor()) : Json(nullptr)},
               {"iterations", iterations}});
  }

  void GetCompare(const std::string& id, const httplib::Request& req, httplib::Response& res) {
    const auto entry = Find(id);
    if (!req.has_param("a") || !req.has_param("b")) {
      throw HttpError{422, "invalid_argument", "compare needs query parameters a and b"};
    }
    const std::size_t a = ParseIndex(req.get_param_value("a"), "a", 422);
    const std::size_t b = ParseIndex(req.get_param_value("b"), "b", 422);
    std::shared_lock read(entry->state_mutex);
    Json body = loop::ToJson(entry->session->state().Compare(a, b));
    body["v"] = loop::kWireVersion;
    body["units"] = "kWh";
    body["session_id"] = id;
    Reply(res, 200, body);
  }

  void GetSession(const std::string& id, httplib::Response& res) {
    const auto entry = Find(id);
    std::shared_lock read(entry->state_mutex);
    Reply(res, 200, SessionJson(*entry));
  }

  void ListSessions(httplib::Response& res) {
    Json list = Json::array();
    std::shared_lock lock(sessions_mutex);
    for (const auto& [id, entry] : sessions) {
      std::shared_lock read(entry->state_mutex);
      list.push_back({{"session_id", id},
                      {"created_at", entry->created_at},
                      {"dataset_ref", entry->dataset_ref},
                      {"iterations", entry->session->state().iterations().size()}});
    }
    Reply(res, 200, Json{{"v", loop::kWireVersion}, {"sessions", list}});
  }

  static HttpError Busy(const std::string& id) {
    return HttpError{409, "session_busy", "another change to this session is in progress",
                     {{"session_id", id}}};
  }

  // Runs a handler and turns failures into the error envelope.
  template <typename Fn>
  static void Guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const HttpError& e) {
      ReplyError(res, e.status, e.code, e.message, e.detail);
    } catch (const Error& e) {
      ReplyError(res, HttpStatusFor(e.code()), ErrorCodeName(e.code()), e.what(), Json::object());
    } catch (const std::exception& e) {
      ReplyError(res, 500, "internal", e.what(), Json::object());
    }
  }

  void Routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.set_write_timeout(options.write_timeout_seconds, 0);
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      Guarded(res, [&] { CreateSession(req, res); });
    });
    server.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
      Guarded(res, [&] { ListSessions(res); });
    });
    server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      Guarded(res, [&] { GetSession(req.matches[1], res); });
    });
    server.Post(R"(/sessions/([^/]+)/iterations)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  Guarded(res, [&] { RunIteration(req.matches[1], res); });
                });
    server.Get(R"(/sessions/([^/]+)/iterations/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 Guarded(res, [&] { GetIteration(req.matches[1], req.matches[2], res); });
               });
    server.Get(R"(/sessions/([^/]+)/iterations/([^/]+)/shap)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 Guarded(res, [&] { GetShap(req.matches[1], req.matches[2], req, res); });
               });
    server.Post(R"(/sessions/([^/]+)/actions)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  Guarded(res, [&] { ApplyAction(req.matches[1], req, res); });
                });
    server.Get(R"(/sessions/([^/]+)/history)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 Guarded(res, [&] { GetHistory(req.matches[1], res); });
               });
    server.Get(R"(/sessions/([^/]+)/compare)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 Guarded(res, [&] { GetCompare(req.matches[1], req, res); });
               });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      ReplyError(res, res.status, res.status == 404 ? "not_found" : "http_error",
                 "no route for " + req.method + " " + req.path, Json::object());
    });
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  std::filesystem::create_directories(impl_->SessionsDir());
  if (impl_->options.restore_sessions) impl_->Restore();
  impl_->Routes();
}

Service::~Service() { Stop(); }

bool Service::Listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int Service::BindToAnyPort(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool Service::ListenAfterBind() { return impl_->server.listen_after_bind(); }

void Service::WaitUntilReady() const { impl_->server.wait_until_ready(); }

void Service::Stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

std::size_t Service::session_count() const {
  std::shared_lock lock(impl_->sessions_mutex);
  return impl_->sessions.size();
}

std::unique_lock<std::mutex> Service::HoldWriter(const std::string& session_id) {
  std::shared_lock lock(impl_->sessions_mutex);
  const auto it = impl_->sessions.find(session_id);
  if (it == impl_->sessions.end()) {
    throw Error(ErrorCode::kInvalidArgument, "no session '" + session_id + "'");
  }
  return std::unique_lock<std::mutex>(it->second->writer);
}

}  // namespace ntlwb::service
