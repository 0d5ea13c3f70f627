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

#include "ntlwb/loop/journal.h"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <utility>

#include "ntlwb/data/csv.h"
#include "ntlwb/gbdt/model_io.h"
#include "ntlwb/util/error.h"
#include "ntlwb/util/text.h"

namespace ntlwb::loop {
namespace {

constexpr const char* kFixedTimestamp = "1970-01-01T00:00:00Z";

std::string Timestamp(bool deterministic) {
  if (deterministic) return kFixedTimestamp;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

[[noreturn]] void Corrupt(std::size_t line, const std::string& message) {
  throw Error(ErrorCode::kCorruptJournal,
              "journal line " + std::to_string(line) + ": " + message);
}

std::string ModelRef(std::size_t index) {
  char name[48];
  std::snprintf(name, sizeof name, "models/iteration-%04zu.model", index);
  return name;
}

std::shared_ptr<const data::FeatureTable> ResolveDataset(const Json& payload,
                                                         const std::filesystem::path& journal,
                                                         std::size_t line) {
  const auto ref = payload.value("dataset_ref", std::string());
  if (ref.empty()) Corrupt(line, "no dataset given and the journal records no dataset_ref");
  std::filesystem::path path(ref);
  if (path.is_relative() && !std::filesystem::exists(path)) {
    path = journal.parent_path() / path;
  }
  try {
    return std::make_shared<const data::FeatureTable>(data::LoadCsv(path));
  } catch (const Error& e) {
    Corrupt(line, "cannot load dataset '" + ref + "': " + e.what());
  }
}

}  // namespace

std::string SessionDigest(const data::FeatureTable& dataset, const LoopConfig& config) {
  return HexDigest(Fnv1a64(dataset.provenance() + "\n" + ToJson(config).dump()));
}

JournaledSession::JournaledSession(std::filesystem::path path, std::unique_ptr<SessionState> state,
                                   JournalOptions options)
    : path_(std::move(path)), state_(std::move(state)), options_(std::move(options)) {
  digest_ = SessionDigest(state_->dataset(), state_->config());
}

JournaledSession JournaledSession::Start(const std::filesystem::path& journal,
                                         std::shared_ptr<const data::FeatureTable> dataset,
                                         LoopConfig config, JournalOptions options) {
  auto state = std::make_unique<SessionState>(std::move(dataset), std::move(config));
  JournaledSession session(journal, std::move(state), std::move(options));
  if (journal.has_parent_path()) std::filesystem::create_directories(journal.parent_path());
  session.out_.open(journal, std::ios::trunc);
  if (!session.out_) throw Error(ErrorCode::kIo, "cannot write journal " + journal.string());
  session.Append("session_started", session.StartPayload());
  return session;
}

JournaledSession JournaledSession::Load(const std::filesystem::path& journal,
                                        JournalOptions options,
                                        std::shared_ptr<const data::FeatureTable> dataset) {
  std::ifstream in(journal);
  if (!in) throw Error(ErrorCode::kIo, "cannot read journal " + journal.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  in.close();

  if (lines.empty()) {
    if (!dataset) Corrupt(1, "journal is empty and no dataset was given");
    return Start(journal, std::move(dataset), LoopConfig{}, std::move(options));
  }

  std::unique_ptr<JournaledSession> session;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    Json record;
    try {
      record = Json::parse(lines[i]);
    } catch (const nlohmann::json::exception&) {
      Corrupt(line_no, "not a complete JSON record");
    }
    if (!record.is_object() || !record.contains("type") || !record.contains("payload") ||
        !record.contains("seq") || !record.contains("digest") || !record.contains("v")) {
      Corrupt(line_no, "record lacks v, seq, type, digest or payload");
    }
    if (record["v"] != kWireVersion) Corrupt(line_no, "unsupported record version");
    if (record["seq"] != i) Corrupt(line_no, "expected seq " + std::to_string(i));
    const auto type = record["type"].is_string() ? record["type"].get<std::string>() : "";
    const Json& payload = record["payload"];

    if (i == 0) {
      if (type != "session_started") Corrupt(line_no, "first record must be session_started");
      auto table = dataset ? dataset : ResolveDataset(payload, journal, line_no);
      LoopConfig config;
      try {
        config = LoopConfigFromJson(payload.at("config"));
      } catch (const std::exception& e) {
        Corrupt(line_no, std::string("bad config: ") + e.what());
      }
      if (payload.value("provenance", std::string()) != table->provenance()) {
        Corrupt(line_no, "dataset provenance does not match the journal");
      }
      std::unique_ptr<SessionState> state;
      try {
        state = std::make_unique<SessionState>(std::move(table), std::move(config));
      } catch (const Error& e) {
        Corrupt(line_no, e.what());
      }
      if (options.dataset_ref.empty()) {
        options.dataset_ref = payload.value("dataset_ref", std::string());
      }
      session.reset(new JournaledSession(journal, std::move(state), options));
      if (record["digest"] != session->digest_) Corrupt(line_no, "digest mismatch");
      session->seq_ = 1;
      continue;
    }

    if (record["digest"] != session->digest_) Corrupt(line_no, "digest mismatch");
    auto& state = *session->state_;
    if (type == "action_applied") {
      try {
        state.Apply(ActionFromJson(payload.at("action")));
      } catch (const std::exception& e) {
        Corrupt(line_no, std::string("action does not replay: ") + e.what());
      }
    } else if (type == "iteration_completed") {
      const auto model_ref = payload.value("model_ref", std::string());
      std::shared_ptr<const gbdt::BoostedEnsemble> model;
      try {
        const auto path = journal.parent_path() / model_ref;
        if (!model_ref.empty() && std::filesystem::exists(path)) {
          model = std::make_shared<const gbdt::BoostedEnsemble>(gbdt::LoadModel(path));
        } else {
          model = state.FitCurrent();
        }
        const auto& replayed = state.RecordIteration(model, model_ref);
        if (ToJson(replayed) != payload) Corrupt(line_no, "replayed iteration differs from record");
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kCorruptJournal) throw;
        Corrupt(line_no, std::string("iteration does not replay: ") + e.what());
      }
    } else if (type != "training_failed") {
      Corrupt(line_no, "unknown record type '" + type + "'");
    }
    ++session->seq_;
  }

  session->out_.open(journal, std::ios::app);
  if (!session->out_) throw Error(ErrorCode::kIo, "cannot append to journal " + journal.string());
  return std::move(*session);
}

void JournaledSession::Append(std::string_view type, Json payload) {
  const std::size_t iteration = state_->iterations().empty() || type != "iteration_completed"
                                    ? state_->iterations().size()
                                    : state_->iterations().back().index;
  Json record{{"v", kWireVersion},
              {"seq", seq_},
              {"type", type},
              {"iteration", iteration},
              {"ts", Timestamp(options_.deterministic)},
              {"digest", digest_},
              {"payload", std::move(payload)}};
  out_ << record.dump() << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::kIo, "cannot append to journal " + path_.string());
  ++seq_;
}

Json JournaledSession::StartPayload() const {
  const auto& dataset = state_->dataset();
  return Json{{"dataset_ref", options_.dataset_ref},
              {"provenance", dataset.provenance()},
              {"rows", dataset.num_rows()},
              {"features", dataset.column_names()},
              {"config", ToJson(state_->config())}};
}

void JournaledSession::Apply(const RefinementAction& action) {
  state_->Apply(action);
  Append("action_applied", Json{{"action", ToJson(action)}});
}

const IterationRecord& JournaledSession::RunIteration() { return Commit(Evaluate(Fit())); }

std::shared_ptr<const gbdt::BoostedEnsemble> JournaledSession::Fit() {
  try {
    return state_->FitCurrent();
  } catch (const Error& e) {
    Append("training_failed", Json{{"error_code", ErrorCodeName(e.code())}, {"message", e.what()}});
    throw;
  }
}

IterationRecord JournaledSession::Evaluate(
    std::shared_ptr<const gbdt::BoostedEnsemble> model) const {
  std::string model_ref;
  if (options_.save_models) {
    model_ref = ModelRef(state_->iterations().size());
    gbdt::SaveModel(*model, path_.parent_path() / model_ref);
  }
  return state_->Evaluate(std::move(model), std::move(model_ref));
}

const IterationRecord& JournaledSession::Commit(IterationRecord record) {
  const auto& committed = state_->Commit(std::move(record));
  Append("iteration_completed", ToJson(committed));
  return committed;
}

}  // namespace ntlwb::loop
