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

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>

#include "ntlwb/shap/explain.h"
#include "ntlwb/util/error.h"

namespace ntlwb::shap {

double ConditionalExpectation(const gbdt::RegressionTree& tree,
                              std::span<const data::Cell> x,
                              const std::vector<bool>& conditioned) {
  std::function<double(std::int32_t)> value = [&](std::int32_t index) -> double {
    const gbdt::TreeNode& node = tree.node(index);
    if (node.is_leaf()) return node.value;
    if (conditioned[node.feature]) return value(tree.Route(index, x[node.feature]));
    const auto& left = tree.node(node.left);
    const auto& right = tree.node(node.right);
    return (static_cast<double>(left.cover) * value(node.left) +
            static_cast<double>(right.cover) * value(node.right)) /
           static_cast<double>(node.cover);
  };
  return value(0);
}

ShapReport BruteForceShap(const gbdt::BoostedEnsemble& model, std::span<const data::Cell> x) {
  const std::size_t p = model.feature_names.size();
  if (p > kMaxBruteForceFeatures) {
    throw Error(ErrorCode::kTooManyFeatures,
                "subset enumeration supports at most " +
                    std::to_string(kMaxBruteForceFeatures) + " features, model has " +
                    std::to_string(p));
  }
  const std::uint32_t subsets = 1u << p;
  std::vector<double> val(subsets);
  std::vector<bool> conditioned(p);
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    for (std::size_t f = 0; f < p; ++f) conditioned[f] = (mask >> f) & 1u;
    double sum = 0;
    for (const auto& tree : model.trees) sum += ConditionalExpectation(tree, x, conditioned);
    val[mask] = model.base_score + model.learning_rate * sum;
  }

  // |S|!(p-|S|-1)!/p! = 1 / (p * C(p-1, |S|))
  std::vector<double> weight(p, 0.0);
  for (std::size_t s = 0; s < p; ++s) {
    double binom = 1;
    for (std::size_t k = 1; k <= s; ++k) {
      binom = binom * static_cast<double>(p - 1 - s + k) / static_cast<double>(k);
    }
    weight[s] = 1.0 / (static_cast<double>(p) * binom);
  }

  ShapReport report;
  report.base_value = val[0];
  report.phi.assign(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    const std::uint32_t bit = 1u << i;
    double total = 0;
    for (std::uint32_t mask = 0; mask < subsets; ++mask) {
      if (mask & bit) continue;
      total += weight[std::popcount(mask)] * (val[mask | bit] - val[mask]);
    }
    report.phi[i] = total;
  }
  return report;
}

}  // namespace ntlwb::shap
