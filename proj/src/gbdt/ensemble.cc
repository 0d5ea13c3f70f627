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

#include "ntlwb/gbdt/ensemble.h"

#include <cmath>

#include "ntlwb/util/error.h"
#include "ntlwb/util/parallel.h"

namespace ntlwb::gbdt {

void TrainConfig::Validate() const {
  if (n_trees < 1) throw Error(ErrorCode::kInvalidArgument, "n_trees must be >= 1");
  if (max_depth < 1) throw Error(ErrorCode::kInvalidArgument, "max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must lie in (0, 1]");
  }
  if (min_child_cover < 1) {
    throw Error(ErrorCode::kInvalidArgument, "min_child_cover must be >= 1");
  }
}

double BoostedEnsemble::Predict(std::span<const data::Cell> row) const {
  return PredictPrefix(row, trees.size());
}

double BoostedEnsemble::PredictPrefix(std::span<const data::Cell> row,
                                      std::size_t n_trees) const {
  double sum = 0;
  for (std::size_t t = 0; t < n_trees && t < trees.size(); ++t) sum += trees[t].Predict(row);
  return base_score + learning_rate * sum;
}

double BoostedEnsemble::ExpectedValue() const {
  double sum = 0;
  for (const auto& tree : trees) sum += tree.ExpectedValue();
  return base_score + learning_rate * sum;
}

FeatureMatrix FeatureMatrix::FromTable(const data::FeatureTable& table,
                                       std::span<const std::string> feature_names) {
  std::vector<const data::FeatureColumn*> columns;
  std::string absent;
  for (const auto& name : feature_names) {
    const auto index = table.column_index(name);
    if (!index) {
      absent += absent.empty() ? name : ", " + name;
      continue;
    }
    columns.push_back(&table.columns()[*index]);
  }
  if (!absent.empty()) {
    throw Error(ErrorCode::kMissingColumn, "rows lack model features: " + absent);
  }
  FeatureMatrix matrix(table.num_rows(), feature_names.size());
  for (std::size_t f = 0; f < columns.size(); ++f) {
    const auto& values = columns[f]->values;
    for (std::size_t r = 0; r < values.size(); ++r) matrix.at(r, f) = values[r];
  }
  return matrix;
}

std::vector<double> Predict(const BoostedEnsemble& model, const FeatureMatrix& rows) {
  std::vector<double> out(rows.rows());
  ParallelFor(rows.rows(), [&](std::size_t r) { out[r] = model.Predict(rows.row(r)); });
  return out;
}

std::vector<double> Predict(const BoostedEnsemble& model, const data::FeatureTable& rows) {
  return Predict(model, FeatureMatrix::FromTable(rows, model.feature_names));
}

double Rmse(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "prediction/label length mismatch");
  }
  if (labels.empty()) return 0.0;
  double sse = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double d = predictions[i] - labels[i];
    sse += d * d;
  }
  return std::sqrt(sse / static_cast<double>(labels.size()));
}

double EvaluateRmse(const BoostedEnsemble& model, const data::FeatureTable& rows) {
  return Rmse(Predict(model, rows), rows.labels());
}

}  // namespace ntlwb::gbdt
