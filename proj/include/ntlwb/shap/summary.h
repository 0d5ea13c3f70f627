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

#ifndef NTLWB_SHAP_SUMMARY_H_
#define NTLWB_SHAP_SUMMARY_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ntlwb/data/feature_table.h"
#include "ntlwb/gbdt/ensemble.h"
#include "ntlwb/shap/explain.h"

namespace ntlwb::shap {

struct BeeswarmPoint {
  std::size_t feature = 0;  // index into feature_names
  std::size_t row = 0;      // index into row_refs
  double phi = 0;
  data::Cell raw;
  // Min-max scaled raw value per feature; unset for MISSING.
  std::optional<double> normalized;
};

// Attributions of a set of explained rows plus their aggregates.
struct GlobalShapSummary {
  std::vector<std::string> feature_names;
  std::vector<std::string> row_refs;
  double base_value = 0;
  std::vector<double> predictions;     // per row
  std::vector<double> phi;             // row-major, rows x features
  std::vector<data::Cell> raw;         // row-major, rows x features
  std::vector<double> importance;      // mean |phi| per feature
  std::vector<std::size_t> feature_order;  // by descending importance, ties by index

  std::size_t num_rows() const { return row_refs.size(); }
  std::size_t num_features() const { return feature_names.size(); }
  double phi_at(std::size_t row, std::size_t feature) const {
    return phi[row * feature_names.size() + feature];
  }
  std::vector<double> phi_column(std::size_t feature) const;
  double max_abs_phi() const;
  std::optional<double> importance_of(const std::string& feature) const;

  // One point per (row, feature), features in importance order, rows in
  // explanation order.
  std::vector<BeeswarmPoint> points() const;

  friend bool operator==(const GlobalShapSummary&, const GlobalShapSummary&) = default;
};

// Explains every row with TreeShap and aggregates.
GlobalShapSummary Summarize(const gbdt::BoostedEnsemble& model, const data::FeatureTable& rows);

// Summary restricted to the k highest-scoring rows (ties by customer id).
GlobalShapSummary TopScoredSummary(const gbdt::BoostedEnsemble& model,
                                   const data::FeatureTable& rows, std::size_t k);

// Row indices of the k highest predictions, descending; ties by id.
std::vector<std::size_t> TopScoredRows(std::span<const double> scores,
                                       std::span<const std::string> ids, std::size_t k);

// feature,row_ref,phi,raw_value,normalized_value (MISSING as empty cells).
std::string FormatSummaryCsv(const GlobalShapSummary& summary);
// feature,mean_abs_phi sorted descending.
std::string FormatImportanceCsv(const GlobalShapSummary& summary);

}  // namespace ntlwb::shap

#endif  // NTLWB_SHAP_SUMMARY_H_
