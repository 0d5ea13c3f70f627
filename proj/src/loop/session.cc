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

#include "ntlwb/loop/session.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "ntlwb/gbdt/trainer.h"
#include "ntlwb/util/error.h"
#include "ntlwb/util/text.h"

namespace ntlwb::loop {
namespace {

template <typename T>
bool SameValue(const std::shared_ptr<const T>& a, const std::shared_ptr<const T>& b) {
  if (!a || !b) return !a && !b;
  return a == b || *a == *b;
}

}  // namespace

void LoopConfig::Validate() const {
  train.Validate();
  advisor.Validate();
  if (energy_k == 0) throw Error(ErrorCode::kInvalidArgument, "energy_k must be positive");
  if (top_k == 0) throw Error(ErrorCode::kInvalidArgument, "top_k must be positive");
}

bool operator==(const IterationRecord& a, const IterationRecord& b) {
  return a.index == b.index && a.actions == b.actions && a.inputs == b.inputs &&
         a.model_ref == b.model_ref && SameValue(a.model, b.model) && a.metrics == b.metrics &&
         SameValue(a.global_summary, b.global_summary) &&
         SameValue(a.top_k_summary, b.top_k_summary) && a.findings == b.findings &&
         a.verdict == b.verdict && a.compared_to == b.compared_to && a.ndcg_drop == b.ndcg_drop;
}

SessionState::SessionState(std::shared_ptr<const data::FeatureTable> dataset, LoopConfig config)
    : dataset_(std::move(dataset)), config_(std::move(config)) {
  if (!dataset_) throw Error(ErrorCode::kInvalidArgument, "session needs a dataset");
  config_.Validate();
  for (const auto p : {data::Partition::kTrain, data::Partition::kValidation,
                       data::Partition::kTest}) {
    if (!dataset_->has_partition(p)) {
      throw Error(ErrorCode::kUnsplitDataset, "dataset has no " +
                                                  std::string(data::PartitionName(p)) +
                                                  " rows; split it first");
    }
  }
  const auto validation = dataset_->rows_in(data::Partition::kValidation);
  if (std::none_of(validation.begin(), validation.end(),
                   [&](std::size_t r) { return dataset_->is_ntl(r); })) {
    throw Error(ErrorCode::kUnsplitDataset,
                "validation split has no NTL rows; NDCG is undefined");
  }
  if (dataset_->num_columns() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "dataset has no feature columns");
  }
  editable_.active_features = dataset_->column_names();
  checkpoint_ = editable_;
}

const IterationRecord& SessionState::iteration(std::size_t index) const {
  if (index >= iterations_.size()) {
    throw Error(ErrorCode::kBadIndex, "iteration " + std::to_string(index) + " does not exist (" +
                                          std::to_string(iterations_.size()) + " recorded)");
  }
  return iterations_[index];
}

double SessionState::effective_label(std::size_t row) const {
  const auto it = editable_.label_overrides.find(dataset_->customer_ids()[row]);
  return it == editable_.label_overrides.end() ? dataset_->labels()[row] : it->second;
}

std::vector<double> SessionState::effective_labels() const {
  std::vector<double> labels = dataset_->labels();
  for (const auto& [id, kwh] : editable_.label_overrides) labels[*dataset_->row_of(id)] = kwh;
  return labels;
}

void SessionState::Apply(const RefinementAction& action) {
  EditableState next = editable_;
  auto& active = next.active_features;
  auto is_active = [&](const std::string& name) {
    return std::find(active.begin(), active.end(), name) != active.end();
  };
  auto require_column = [&](const std::string& name) {
    if (!dataset_->column_index(name)) {
      throw Error(ErrorCode::kUnknownFeature, "unknown feature '" + name + "'");
    }
  };

  switch (action.kind) {
    case ActionKind::kCapLabel: {
      const auto row = dataset_->row_of(action.target);
      if (!row) throw Error(ErrorCode::kUnknownCustomer, "unknown customer '" + action.target + "'");
      if (!dataset_->is_ntl(*row)) {
        throw Error(ErrorCode::kInvalidCap, "customer '" + action.target + "' is not an NTL case");
      }
      const double current = effective_label(*row);
      if (!std::isfinite(action.value) || action.value <= 0 || action.value >= current) {
        throw Error(ErrorCode::kInvalidCap, "cap " + FormatDouble(action.value) +
                                                " must be positive and below the current label " +
                                                FormatDouble(current));
      }
      next.label_overrides[action.target] = action.value;
      break;
    }
    case ActionKind::kDropFeature: {
      require_column(action.target);
      if (!is_active(action.target)) {
        throw Error(ErrorCode::kInvalidAction, "feature '" + action.target + "' is not active");
      }
      if (active.size() == 1) {
        throw Error(ErrorCode::kInvalidAction, "cannot drop the last active feature");
      }
      active.erase(std::find(active.begin(), active.end(), action.target));
      break;
    }
    case ActionKind::kRestoreFeature: {
      require_column(action.target);
      if (is_active(action.target)) {
        throw Error(ErrorCode::kInvalidAction, "feature '" + action.target + "' is already active");
      }
      const std::set<std::string> keep(active.begin(), active.end());
      active.clear();
      for (const auto& name : dataset_->column_names()) {
        if (keep.contains(name) || name == action.target) active.push_back(name);
      }
      break;
    }
    case ActionKind::kUndo: {
      if (undo_.empty()) throw Error(ErrorCode::kInvalidAction, "nothing to undo");
      editable_ = undo_.back().before;
      undo_.pop_back();
      pending_.push_back(action);
      return;
    }
  }
  undo_.push_back({action, editable_});
  editable_ = std::move(next);
  pending_.push_back(action);
}

data::FeatureTable SessionState::TrainingTable() const {
  const auto rows = dataset_->rows_in(data::Partition::kTrain);
  return dataset_->with_labels(effective_labels())
      .select_rows(rows)
      .select_columns(editable_.active_features);
}

std::shared_ptr<const gbdt::BoostedEnsemble> SessionState::FitCurrent() const {
  try {
    return std::make_shared<const gbdt::BoostedEnsemble>(
        gbdt::Fit(TrainingTable(), config_.train));
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kTrainingFailure, std::string("training failed: ") + e.what());
  }
}

const IterationRecord& SessionState::RunIteration() {
  return RecordIteration(FitCurrent());
}

const IterationRecord& SessionState::RecordIteration(
    std::shared_ptr<const gbdt::BoostedEnsemble> model, std::string model_ref) {
  return Commit(Evaluate(std::move(model), std::move(model_ref)));
}

IterationRecord SessionState::Evaluate(std::shared_ptr<const gbdt::BoostedEnsemble> model,
                                       std::string model_ref) const {
  if (!model) throw Error(ErrorCode::kInvalidArgument, "no model to record");
  if (model->feature_names != editable_.active_features) {
    throw Error(ErrorCode::kInvalidArgument,
                "model features do not match the session's active features");
  }
  const auto training = TrainingTable();
  const auto validation = dataset_->select_rows(dataset_->rows_in(data::Partition::kValidation));
  const auto test = dataset_->select_rows(dataset_->rows_in(data::Partition::kTest));

  IterationRecord record;
  record.index = iterations_.size();
  record.actions = pending_;
  record.inputs = editable_;
  record.model_ref = std::move(model_ref);
  record.model = model;

  auto& m = record.metrics;
  m.ndcg_validation = *metrics::Ndcg(gbdt::Predict(*model, validation), validation.labels());
  m.k = std::min(config_.energy_k, test.num_rows());
  m.energy_at_k_test = metrics::EnergyAtK(gbdt::Predict(*model, test), test.labels(), m.k);
  m.rmse_train = gbdt::EvaluateRmse(*model, training);

  auto global = std::make_shared<const shap::GlobalShapSummary>(shap::Summarize(*model, training));
  m.max_abs_phi = global->max_abs_phi();
  record.top_k_summary = std::make_shared<const shap::GlobalShapSummary>(
      shap::TopScoredSummary(*model, test, std::min(config_.top_k, test.num_rows())));
  record.findings = Advise(training, *global, config_.advisor);
  record.global_summary = std::move(global);
  return record;
}

const IterationRecord& SessionState::Commit(IterationRecord record) {
  if (record.index != iterations_.size() || record.actions != pending_ ||
      record.inputs != editable_) {
    throw Error(ErrorCode::kInvalidArgument, "iteration was evaluated on a stale state");
  }
  const auto& m = record.metrics;
  if (cursor_) {
    const double previous = iterations_[*cursor_].metrics.ndcg_validation;
    record.compared_to = cursor_;
    record.ndcg_drop = previous - m.ndcg_validation;
    record.verdict = metrics::Guard(previous, m.ndcg_validation);
  }

  if (record.accepted()) {
    cursor_ = record.index;
    checkpoint_ = editable_;
    checkpoint_undo_ = undo_;
  } else {
    editable_ = checkpoint_;
    undo_ = checkpoint_undo_;
  }
  pending_.clear();
  iterations_.push_back(std::move(record));
  return iterations_.back();
}

Comparison SessionState::Compare(std::size_t a, std::size_t b) const {
  const auto& ra = iteration(a);
  const auto& rb = iteration(b);
  Comparison out;
  out.a = a;
  out.b = b;
  out.metrics_a = ra.metrics;
  out.metrics_b = rb.metrics;
  out.ndcg_delta = rb.metrics.ndcg_validation - ra.metrics.ndcg_validation;
  out.energy_delta = rb.metrics.energy_at_k_test - ra.metrics.energy_at_k_test;
  out.rmse_delta = rb.metrics.rmse_train - ra.metrics.rmse_train;
  out.max_abs_phi_delta = rb.metrics.max_abs_phi - ra.metrics.max_abs_phi;

  for (const auto& name : dataset_->column_names()) {
    const auto ia = ra.global_summary->importance_of(name);
    const auto ib = rb.global_summary->importance_of(name);
    if (!ia && !ib) continue;
    out.importance.push_back({name, ia, ib, ib.value_or(0.0) - ia.value_or(0.0)});
  }
  const auto& fa = ra.inputs.active_features;
  const auto& fb = rb.inputs.active_features;
  for (const auto& name : fa) {
    if (std::find(fb.begin(), fb.end(), name) == fb.end()) out.features_removed.push_back(name);
  }
  for (const auto& name : fb) {
    if (std::find(fa.begin(), fa.end(), name) == fa.end()) out.features_added.push_back(name);
  }
  std::set<std::string> customers;
  for (const auto& [id, kwh] : ra.inputs.label_overrides) customers.insert(id);
  for (const auto& [id, kwh] : rb.inputs.label_overrides) customers.insert(id);
  for (const auto& id : customers) {
    OverrideDelta d{id, std::nullopt, std::nullopt};
    if (const auto it = ra.inputs.label_overrides.find(id); it != ra.inputs.label_overrides.end()) {
      d.a = it->second;
    }
    if (const auto it = rb.inputs.label_overrides.find(id); it != rb.inputs.label_overrides.end()) {
      d.b = it->second;
    }
    if (d.a != d.b) out.overrides.push_back(std::move(d));
  }
  return out;
}

bool operator==(const SessionState& a, const SessionState& b) {
  return SameValue(a.dataset_, b.dataset_) && a.config_ == b.config_ && a.editable_ == b.editable_ &&
         a.iterations_ == b.iterations_ && a.cursor_ == b.cursor_ && a.pending_ == b.pending_ &&
         a.undo_ == b.undo_ && a.checkpoint_ == b.checkpoint_ &&
         a.checkpoint_undo_ == b.checkpoint_undo_;
}

}  // namespace ntlwb::loop
