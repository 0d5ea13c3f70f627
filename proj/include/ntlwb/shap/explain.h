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

#ifndef NTLWB_SHAP_EXPLAIN_H_
#define NTLWB_SHAP_EXPLAIN_H_

#include <span>
#include <string>
#include <vector>

#include "ntlwb/data/feature_table.h"
#include "ntlwb/gbdt/ensemble.h"

namespace ntlwb::shap {

// Attribution of one prediction, in model output units (kWh).
// Local accuracy: base_value + sum(phi) == prediction.
struct ShapReport {
  double base_value = 0;
  std::vector<double> phi;  // aligned to the model's feature_names
  std::string row_ref;
};

inline constexpr std::size_t kMaxBruteForceFeatures = 20;

// Path-dependent value of a feature subset for one tree: splits on a feature
// in `conditioned` follow x (MISSING follows missing_goes); other splits
// average both children weighted by cover.
double ConditionalExpectation(const gbdt::RegressionTree& tree,
                              std::span<const data::Cell> x,
                              const std::vector<bool>& conditioned);

// Enumerates all 2^p subsets with the Shapley weights |S|!(p-|S|-1)!/p!.
// val(S) = base_score + lr * sum_t ConditionalExpectation(tree_t, x, S).
// Throws kTooManyFeatures when p > kMaxBruteForceFeatures.
ShapReport BruteForceShap(const gbdt::BoostedEnsemble& model, std::span<const data::Cell> x);

// Polynomial-time exact attribution under the same value function.
ShapReport TreeShap(const gbdt::BoostedEnsemble& model, std::span<const data::Cell> x);

// Adds lr-unscaled attributions of a single tree into `phi`.
void TreeShapSingle(const gbdt::RegressionTree& tree, std::span<const data::Cell> x,
                    std::span<double> phi);

}  // namespace ntlwb::shap

#endif  // NTLWB_SHAP_EXPLAIN_H_
