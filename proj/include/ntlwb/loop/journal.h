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

#ifndef NTLWB_LOOP_JOURNAL_H_
#define NTLWB_LOOP_JOURNAL_H_

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "ntlwb/loop/json.h"
#include "ntlwb/loop/session.h"

namespace ntlwb::loop {

struct JournalOptions {
  // Fixed timestamps so identical runs give identical journals.
  bool deterministic = false;
  // Save each iteration's model next to the journal under models/.
  bool save_models = true;
  // Where the dataset can be reloaded from; recorded, not interpreted.
  std::string dataset_ref;
};

// Hex digest of dataset provenance and loop configuration.
std::string SessionDigest(const data::FeatureTable& dataset, const LoopConfig& config);

// A session whose state changes are appended to a line-delimited JSON
// journal, one event per line:
//   {"v":1,"seq":N,"type":...,"iteration":I,"ts":...,"digest":...,"payload":{...}}
// Event types: session_started, action_applied, iteration_completed,
// training_failed.
class JournaledSession {
 public:
  // Truncates `journal`.
  static JournaledSession Start(const std::filesystem::path& journal,
                                std::shared_ptr<const data::FeatureTable> dataset,
                                LoopConfig config, JournalOptions options = {});

  // Replays `journal` and keeps appending to it. Saved models are reused
  // when present, otherwise the iteration is refitted; either way the
  // replayed metrics must match the recorded ones. Without `dataset` the
  // CSV named by dataset_ref is loaded. Throws kCorruptJournal with a line
  // number.
  static JournaledSession Load(const std::filesystem::path& journal, JournalOptions options = {},
                               std::shared_ptr<const data::FeatureTable> dataset = nullptr);

  JournaledSession(JournaledSession&&) = default;
  JournaledSession& operator=(JournaledSession&&) = default;

  const SessionState& state() const { return *state_; }
  const std::filesystem::path& path() const { return path_; }
  std::size_t event_count() const { return seq_; }

  void Apply(const RefinementAction& action);
  const IterationRecord& RunIteration();

  // RunIteration in steps, for callers that serialize writers themselves and
  // let readers see the state while a model trains. Fit journals a
  // training_failed event on error; Commit journals the iteration.
  std::shared_ptr<const gbdt::BoostedEnsemble> Fit();
  IterationRecord Evaluate(std::shared_ptr<const gbdt::BoostedEnsemble> model) const;
  const IterationRecord& Commit(IterationRecord record);

 private:
  JournaledSession(std::filesystem::path path, std::unique_ptr<SessionState> state,
                   JournalOptions options);

  void Append(std::string_view type, Json payload);
  Json StartPayload() const;
  Json IterationPayload(const IterationRecord& record) const;

  std::filesystem::path path_;
  std::unique_ptr<SessionState> state_;
  JournalOptions options_;
  std::string digest_;
  std::size_t seq_ = 0;
  std::ofstream out_;
};

}  // namespace ntlwb::loop

#endif  // NTLWB_LOOP_JOURNAL_H_
