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

#include "ntlwb/loop/json.h"

#include <cmath>
#include <string>

#include "ntlwb/util/error.h"

namespace ntlwb::loop {
namespace {

Json Optional(const std::optional<double>& value) {
  return value ? Json(*value) : Json(nullptr);
}

[[noreturn]] void BadAction(const std::string& message) {
  throw Error(ErrorCode::kInvalidAction, message);
}

template <typename T>
T Field(const Json& json, const char* key, T fallback) {
  if (!json.contains(key)) return fallback;
  try {
    return json.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config field '") + key +
                                                 "' has the wrong type");
  }
}

}  // namespace

Json ToJson(const RefinementAction& action) {
  Json out{{"kind", ActionKindName(action.kind)}};
  switch (action.kind) {
    case ActionKind::kCapLabel:
      out["customer_id"] = action.target;
      out["kwh"] = action.value;
      break;
    case ActionKind::kDropFeature:
    case ActionKind::kRestoreFeature:
      out["feature"] = action.target;
      break;
    case ActionKind::kUndo:
      break;
  }
  return out;
}

RefinementAction ActionFromJson(const Json& json) {
  if (!json.is_object()) BadAction("action must be an object");
  if (!json.contains("kind") || !json["kind"].is_string()) {
    BadAction("action needs a string 'kind'");
  }
  const auto kind = ParseActionKind(json["kind"].get<std::string>());
  if (!kind) BadAction("unknown action kind '" + json["kind"].get<std::string>() + "'");
  switch (*kind) {
    case ActionKind::kCapLabel: {
      if (!json.contains("customer_id") || !json["customer_id"].is_string()) {
        BadAction("cap_label needs a string 'customer_id'");
      }
      if (!json.contains("kwh") || !json["kwh"].is_number()) {
        BadAction("cap_label needs a numeric 'kwh'");
      }
      return RefinementAction::CapLabel(json["customer_id"].get<std::string>(),
                                        json["kwh"].get<double>());
    }
    case ActionKind::kDropFeature:
    case ActionKind::kRestoreFeature: {
      if (!json.contains("feature") || !json["feature"].is_string()) {
        BadAction(std::string(ActionKindName(*kind)) + " needs a string 'feature'");
      }
      const auto feature = json["feature"].get<std::string>();
      return *kind == ActionKind::kDropFeature ? RefinementAction::DropFeature(feature)
                                               : RefinementAction::RestoreFeature(feature);
    }
    case ActionKind::kUndo:
      return RefinementAction::Undo();
  }
  BadAction("unreachable action kind");
}

Json ToJson(const gbdt::TrainConfig& config) {
  return Json{{"n_trees", config.n_trees},
              {"max_depth", config.max_depth},
              {"learning_rate", config.learning_rate},
              {"min_child_cover", config.min_child_cover},
              {"seed", config.seed}};
}

Json ToJson(const LoopConfig& config) {
  const auto& a = config.advisor;
  return Json{{"train", ToJson(config.train)},
              {"energy_k", config.energy_k},
              {"top_k", config.top_k},
              {"advisor",
               {{"outlier_ratio", a.outlier_ratio},
                {"outlier_robust_z", a.outlier_robust_z},
                {"low_importance_share", a.low_importance_share},
                {"correlated_pearson", a.correlated_pearson},
                {"correlated_phi_spearman", a.correlated_phi_spearman}}}};
}

LoopConfig LoopConfigFromJson(const Json& json) {
  if (!json.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be an object");
  LoopConfig config;
  if (json.contains("train")) {
    const auto& t = json["train"];
    if (!t.is_object()) throw Error(ErrorCode::kInvalidArgument, "'train' must be an object");
    auto& c = config.train;
    c.n_trees = Field(t, "n_trees", c.n_trees);
    c.max_depth = Field(t, "max_depth", c.max_depth);
    c.learning_rate = Field(t, "learning_rate", c.learning_rate);
    c.min_child_cover = Field(t, "min_child_cover", c.min_child_cover);
    c.seed = Field(t, "seed", c.seed);
  }
  config.energy_k = Field(json, "energy_k", config.energy_k);
  config.top_k = Field(json, "top_k", config.top_k);
  if (json.contains("advisor")) {
    const auto& a = json["advisor"];
    if (!a.is_object()) throw Error(ErrorCode::kInvalidArgument, "'advisor' must be an object");
    auto& c = config.advisor;
    c.outlier_ratio = Field(a, "outlier_ratio", c.outlier_ratio);
    c.outlier_robust_z = Field(a, "outlier_robust_z", c.outlier_robust_z);
    c.low_importance_share = Field(a, "low_importance_share", c.low_importance_share);
    c.correlated_pearson = Field(a, "correlated_pearson", c.correlated_pearson);
    c.correlated_phi_spearman = Field(a, "correlated_phi_spearman", c.correlated_phi_spearman);
  }
  config.Validate();
  return config;
}

Json ToJson(const IterationMetrics& metrics) {
  return Json{{"ndcg_validation", metrics.ndcg_validation},
              {"energy_at_k_test", metrics.energy_at_k_test},
              {"k", metrics.k},
              {"rmse_train", metrics.rmse_train},
              {"max_abs_phi", metrics.max_abs_phi}};
}

Json ToJson(const EditableState& state) {
  Json overrides = Json::array();
  for (const auto& [id, kwh] : state.label_overrides) {
    overrides.push_back({{"customer_id", id}, {"kwh", kwh}});
  }
  return Json{{"active_features", state.active_features}, {"label_overrides", overrides}};
}

Json ToJson(const AdvisorFindings& findings) {
  Json out = Json::array();
  for (const auto& f : findings.outliers) {
    out.push_back({{"kind", "outlier"},
                   {"customer_id", f.customer_id},
                   {"label", f.label},
                   {"ratio_to_second_max", Optional(f.ratio_to_second_max)},
                   {"robust_z", Optional(f.robust_z)}});
  }
  for (const auto& f : findings.low_importance) {
    out.push_back({{"kind", "low_importance"}, {"feature", f.feature}, {"share", f.share}});
  }
  for (const auto& f : findings.correlated_pairs) {
    out.push_back({{"kind", "correlated_pair"},
                   {"feature_a", f.feature_a},
                   {"feature_b", f.feature_b},
                   {"pearson", f.pearson},
                   {"phi_spearman", f.phi_spearman}});
  }
  return out;
}

Json ToJson(const IterationRecord& record) {
  Json actions = Json::array();
  for (const auto& a : record.actions) actions.push_back(ToJson(a));
  return Json{{"index", record.index},
              {"actions", actions},
              {"inputs", ToJson(record.inputs)},
              {"model_ref", record.model_ref},
              {"metrics", ToJson(record.metrics)},
              {"guard",
               {{"verdict", metrics::GuardVerdictName(record.verdict)},
                {"compared_to", record.compared_to ? Json(*record.compared_to) : Json(nullptr)},
                {"ndcg_drop", record.ndcg_drop},
                {"max_drop", metrics::kGuardMaxDrop}}},
              {"accepted", record.accepted()},
              {"reverted", record.reverted()},
              {"findings", ToJson(record.findings)}};
}

Json ToJson(const Comparison& c) {
  Json importance = Json::array();
  for (const auto& d : c.importance) {
    importance.push_back(
        {{"feature", d.feature}, {"a", Optional(d.a)}, {"b", Optional(d.b)}, {"delta", d.delta}});
  }
  Json overrides = Json::array();
  for (const auto& d : c.overrides) {
    overrides.push_back({{"customer_id", d.customer_id}, {"a", Optional(d.a)}, {"b", Optional(d.b)}});
  }
  return Json{{"a", c.a},
              {"b", c.b},
              {"metrics_a", ToJson(c.metrics_a)},
              {"metrics_b", ToJson(c.metrics_b)},
              {"deltas",
               {{"ndcg_validation", c.ndcg_delta},
                {"energy_at_k_test", c.energy_delta},
                {"rmse_train", c.rmse_delta},
                {"max_abs_phi", c.max_abs_phi_delta}}},
              {"importance", importance},
              {"features_removed", c.features_removed},
              {"features_added", c.features_added},
              {"overrides", overrides}};
}

Json SummaryToJson(const shap::GlobalShapSummary& summary, std::string_view scope,
                   std::optional<std::size_t> limit) {
  const std::size_t rows = std::min(summary.num_rows(), limit.value_or(summary.num_rows()));
  const std::size_t p = summary.num_features();
  Json order = Json::array();
  Json importance = Json::array();
  for (const auto f : summary.feature_order) {
    order.push_back(summary.feature_names[f]);
    importance.push_back({{"feature", summary.feature_names[f]},
                          {"mean_abs_phi", summary.importance[f]}});
  }
  // Min-max scaling over the rows actually returned.
  std::vector<double> lo(p, INFINITY), hi(p, -INFINITY);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t f = 0; f < p; ++f) {
      if (const auto& v = summary.raw[r * p + f]) {
        lo[f] = std::min(lo[f], *v);
        hi[f] = std::max(hi[f], *v);
      }
    }
  }
  Json points = Json::array();
  for (const auto f : summary.feature_order) {
    for (std::size_t r = 0; r < rows; ++r) {
      const auto& raw = summary.raw[r * p + f];
      Json normalized = nullptr;
      if (raw) normalized = hi[f] > lo[f] ? (*raw - lo[f]) / (hi[f] - lo[f]) : 0.5;
      points.push_back({{"feature", summary.feature_names[f]},
                        {"customer_id", summary.row_refs[r]},
                        {"phi", summary.phi_at(r, f)},
                        {"raw", raw ? Json(*raw) : Json(nullptr)},
                        {"normalized", normalized},
                        {"missing", !raw.has_value()}});
    }
  }
  Json predictions = Json::array();
  for (std::size_t r = 0; r < rows; ++r) {
    predictions.push_back({{"customer_id", summary.row_refs[r]}, {"score", summary.predictions[r]}});
  }
  return Json{{"v", kWireVersion},
              {"units", "kWh"},
              {"scope", scope},
              {"rows", rows},
              {"base_value", summary.base_value},
              {"feature_order", order},
              {"importance", importance},
              {"predictions", predictions},
              {"points", points}};
}

Json SnapshotToJson(const SessionState& state) {
  Json pending = Json::array();
  for (const auto& a : state.pending_actions()) pending.push_back(ToJson(a));
  Json out = ToJson(state.editable());
  out["cursor"] = state.cursor() ? Json(*state.cursor()) : Json(nullptr);
  out["iterations"] = state.iterations().size();
  out["pending_actions"] = pending;
  out["undo_depth"] = state.undo_stack().size();
  out["all_features"] = state.dataset().column_names();
  return out;
}

}  // namespace ntlwb::loop
