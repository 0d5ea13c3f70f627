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

#ifndef NTLWB_LOOP_SESSION_H_
#define NTLWB_LOOP_SESSION_H_

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ntlwb/data/feature_table.h"
#include "ntlwb/gbdt/ensemble.h"
#include "ntlwb/loop/action.h"
#include "ntlwb/loop/advisor.h"
#include "ntlwb/metrics/ranking.h"
#include "ntlwb/shap/summary.h"

namespace ntlwb::loop {

struct LoopConfig {
  gbdt::TrainConfig train;
  // energy@k on the test split; clipped to the split size.
  std::size_t energy_k = 200;
  // Rows kept in the top-scored test summary.
  std::size_t top_k = 200;
  AdvisorConfig advisor;

  void Validate() const;
  friend bool operator==(const LoopConfig&, const LoopConfig&) = default;
};

// The part of a session that actions edit.
struct EditableState {
  std::vector<std::string> active_features;  // dataset column order
  std::map<std::string, double> label_overrides;

  friend bool operator==(const EditableState&, const EditableState&) = default;
};

struct UndoEntry {
  RefinementAction action;
  EditableState before;

  friend bool operator==(const UndoEntry&, const UndoEntry&) = default;
};

struct IterationMetrics {
  double ndcg_validation = 0;
  double energy_at_k_test = 0;
  std::size_t k = 0;
  double rmse_train = 0;
  double max_abs_phi = 0;

  friend bool operator==(const IterationMetrics&, const IterationMetrics&) = default;
};

struct IterationRecord {
  std::size_t index = 0;
  // Actions applied since the previous iteration.
  std::vector<RefinementAction> actions;
  EditableState inputs;
  std::string model_ref;
  std::shared_ptr<const gbdt::BoostedEnsemble> model;
  IterationMetrics metrics;
  std::shared_ptr<const shap::GlobalShapSummary> global_summary;
  std::shared_ptr<const shap::GlobalShapSummary> top_k_summary;
  AdvisorFindings findings;
  metrics::GuardVerdict verdict = metrics::GuardVerdict::kAccept;
  // Last accepted iteration the guard compared against.
  std::optional<std::size_t> compared_to;
  double ndcg_drop = 0;

  bool accepted() const { return verdict == metrics::GuardVerdict::kAccept; }
  // A rejected iteration rolls back the actions that led to it.
  bool reverted() const { return !accepted() && !actions.empty(); }
};

// Deep equality: models and summaries are compared by value.
bool operator==(const IterationRecord& a, const IterationRecord& b);

struct ImportanceDelta {
  std::string feature;
  std::optional<double> a;
  std::optional<double> b;
  double delta = 0;
};

struct OverrideDelta {
  std::string customer_id;
  std::optional<double> a;
  std::optional<double> b;
};

struct Comparison {
  std::size_t a = 0;
  std::size_t b = 0;
  IterationMetrics metrics_a;
  IterationMetrics metrics_b;
  double ndcg_delta = 0;
  double energy_delta = 0;
  double rmse_delta = 0;
  double max_abs_phi_delta = 0;
  std::vector<ImportanceDelta> importance;  // dataset column order
  std::vector<std::string> features_removed;
  std::vector<std::string> features_added;
  std::vector<OverrideDelta> overrides;  // by customer id
};

// Train, explain, advise, act, re-train. Actions only edit the state;
// RunIteration fits and evaluates a model and applies the NDCG guard against
// the last accepted iteration. Validation NDCG and test energy@k always use
// the original labels.
class SessionState {
 public:
  // Requires train, validation and test rows and at least one NTL row in
  // validation. Throws kUnsplitDataset otherwise.
  SessionState(std::shared_ptr<const data::FeatureTable> dataset, LoopConfig config);

  const data::FeatureTable& dataset() const { return *dataset_; }
  const std::shared_ptr<const data::FeatureTable>& dataset_ptr() const { return dataset_; }
  const LoopConfig& config() const { return config_; }
  const EditableState& editable() const { return editable_; }
  const std::vector<std::string>& active_features() const { return editable_.active_features; }
  const std::map<std::string, double>& label_overrides() const {
    return editable_.label_overrides;
  }
  const std::vector<IterationRecord>& iterations() const { return iterations_; }
  const IterationRecord& iteration(std::size_t index) const;
  // Index of the model in effect (last accepted iteration).
  std::optional<std::size_t> cursor() const { return cursor_; }
  const std::vector<RefinementAction>& pending_actions() const { return pending_; }
  const std::vector<UndoEntry>& undo_stack() const { return undo_; }

  // Label the model trains on for `row`.
  double effective_label(std::size_t row) const;
  std::vector<double> effective_labels() const;

  // Throws kUnknownFeature, kUnknownCustomer, kInvalidCap or kInvalidAction;
  // the state is unchanged on error.
  void Apply(const RefinementAction& action);

  // Fits on the train split with the current edits. Fit errors surface as
  // kTrainingFailure and leave the state unchanged.
  const IterationRecord& RunIteration();
  std::shared_ptr<const gbdt::BoostedEnsemble> FitCurrent() const;
  // Evaluates a model fitted on the current edits and appends its record.
  const IterationRecord& RecordIteration(std::shared_ptr<const gbdt::BoostedEnsemble> model,
                                         std::string model_ref = {});
  // RecordIteration in two steps: the expensive, read-only evaluation and
  // the guard plus state update. Commit requires that no action was applied
  // in between.
  IterationRecord Evaluate(std::shared_ptr<const gbdt::BoostedEnsemble> model,
                           std::string model_ref = {}) const;
  const IterationRecord& Commit(IterationRecord record);

  Comparison Compare(std::size_t a, std::size_t b) const;

  friend bool operator==(const SessionState& a, const SessionState& b);

 private:
  data::FeatureTable TrainingTable() const;

  std::shared_ptr<const data::FeatureTable> dataset_;
  LoopConfig config_;
  EditableState editable_;
  std::vector<IterationRecord> iterations_;
  std::optional<std::size_t> cursor_;
  std::vector<RefinementAction> pending_;
  std::vector<UndoEntry> undo_;
  // State as of the last accepted iteration, restored on a guard rejection.
  EditableState checkpoint_;
  std::vector<UndoEntry> checkpoint_undo_;
};

}  // namespace ntlwb::loop

#endif  // NTLWB_LOOP_SESSION_H_
