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

#ifndef NTLWB_GBDT_ENSEMBLE_H_
#define NTLWB_GBDT_ENSEMBLE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ntlwb/data/feature_table.h"
#include "ntlwb/gbdt/tree.h"

namespace ntlwb::gbdt {

struct TrainConfig {
  std::size_t n_trees = 200;
  std::size_t max_depth = 6;
  double learning_rate = 0.1;
  std::int64_t min_child_cover = 20;
  // Split search is exact and deterministic; the seed is carried so that a
  // recorded configuration identifies its run completely.
  std::uint64_t seed = 0;

  void Validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// prediction(x) = base_score + learning_rate * sum_t tree_t(x)
struct BoostedEnsemble {
  double base_score = 0;
  double learning_rate = 1.0;
  std::vector<std::string> feature_names;
  std::vector<RegressionTree> trees;
  TrainConfig config;

  double Predict(std::span<const data::Cell> row) const;
  // Uses only the first `n_trees` trees.
  double PredictPrefix(std::span<const data::Cell> row, std::size_t n_trees) const;
  // base_score + lr * sum of cover-weighted tree means.
  double ExpectedValue() const;

  friend bool operator==(const BoostedEnsemble&, const BoostedEnsemble&) = default;
};

// Row-major cells aligned to a fixed feature order.
class FeatureMatrix {
 public:
  FeatureMatrix(std::size_t rows, std::size_t features)
      : rows_(rows), features_(features), cells_(rows * features) {}

  // Columns of `table` named by `feature_names`; extra columns are ignored.
  // Throws kMissingColumn listing every absent name.
  static FeatureMatrix FromTable(const data::FeatureTable& table,
                                 std::span<const std::string> feature_names);

  std::size_t rows() const { return rows_; }
  std::size_t features() const { return features_; }
  std::span<const data::Cell> row(std::size_t r) const {
    return {cells_.data() + r * features_, features_};
  }
  data::Cell& at(std::size_t r, std::size_t f) { return cells_[r * features_ + f]; }
  const data::Cell& at(std::size_t r, std::size_t f) const { return cells_[r * features_ + f]; }

 private:
  std::size_t rows_;
  std::size_t features_;
  std::vector<data::Cell> cells_;
};

std::vector<double> Predict(const BoostedEnsemble& model, const data::FeatureTable& rows);
std::vector<double> Predict(const BoostedEnsemble& model, const FeatureMatrix& rows);

double Rmse(std::span<const double> predictions, std::span<const double> labels);
double EvaluateRmse(const BoostedEnsemble& model, const data::FeatureTable& rows);

}  // namespace ntlwb::gbdt

#endif  // NTLWB_GBDT_ENSEMBLE_H_
