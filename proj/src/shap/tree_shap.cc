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

#include <algorithm>
#include <vector>

#include "ntlwb/shap/explain.h"

namespace ntlwb::shap {
namespace {

// One feature on the unique path from the root. zero_fraction is the share
// of cover that follows the path when the feature is not conditioned on;
// one_fraction is 1 when x itself follows the path, else 0. weight holds the
// permutation weight of subsets of each size.
struct PathElement {
  std::int32_t feature = -1;
  double zero_fraction = 0;
  double one_fraction = 0;
  double weight = 0;
};

void ExtendPath(PathElement* path, int depth, double zero_fraction, double one_fraction,
                std::int32_t feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].weight += one_fraction * path[i].weight * (i + 1) / static_cast<double>(depth + 1);
    path[i].weight = zero_fraction * path[i].weight * (depth - i) / static_cast<double>(depth + 1);
  }
}

void UnwindPath(PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next_one_portion = path[depth].weight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0) {
      const double saved = path[i].weight;
      path[i].weight = next_one_portion * (depth + 1) / ((i + 1) * one);
      next_one_portion = saved - path[i].weight * zero * (depth - i) / static_cast<double>(depth + 1);
    } else {
      path[i].weight = path[i].weight * (depth + 1) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

// Total weight of the path with element `index` removed.
double UnwoundWeightSum(const PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next_one_portion = path[depth].weight;
  double total = 0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0) {
      const double w = next_one_portion * (depth + 1) / ((i + 1) * one);
      total += w;
      next_one_portion = path[i].weight - w * zero * (depth - i) / static_cast<double>(depth + 1);
    } else {
      total += path[i].weight / zero * (depth + 1) / static_cast<double>(depth - i);
    }
  }
  return total;
}

class PathWalker {
 public:
  PathWalker(const gbdt::RegressionTree& tree, std::span<const data::Cell> x,
             std::span<double> phi)
      : tree_(tree), x_(x), phi_(phi) {
    const std::size_t depth = tree.depth() + 2;
    storage_.resize(depth * (depth + 1) / 2);
  }

  void Run() { Recurse(0, 0, storage_.data(), 1.0, 1.0, -1); }

 private:
  void Recurse(std::int32_t index, int depth, PathElement* parent_path, double zero_fraction,
               double one_fraction, std::int32_t feature) {
    // Each level works on its own copy, laid out after the parent's.
    PathElement* path = parent_path + depth;
    std::copy(parent_path, parent_path + depth, path);
    ExtendPath(path, depth, zero_fraction, one_fraction, feature);

    const gbdt::TreeNode& node = tree_.node(index);
    if (node.is_leaf()) {
      for (int i = 1; i <= depth; ++i) {
        const double w = UnwoundWeightSum(path, depth, i);
        const PathElement& e = path[i];
        phi_[e.feature] += w * (e.one_fraction - e.zero_fraction) * node.value;
      }
      return;
    }

    const std::int32_t hot = tree_.Route(index, x_[node.feature]);
    const std::int32_t cold = hot == node.left ? node.right : node.left;
    const double cover = static_cast<double>(node.cover);
    const double hot_zero = static_cast<double>(tree_.node(hot).cover) / cover;
    const double cold_zero = static_cast<double>(tree_.node(cold).cover) / cover;

    // A feature already on the path is unwound and re-extended with the
    // combined fractions.
    double incoming_zero = 1;
    double incoming_one = 1;
    int existing = 1;
    for (; existing <= depth; ++existing) {
      if (path[existing].feature == node.feature) break;
    }
    if (existing <= depth) {
      incoming_zero = path[existing].zero_fraction;
      incoming_one = path[existing].one_fraction;
      UnwindPath(path, depth, existing);
      --depth;
    }
    Recurse(hot, depth + 1, path, hot_zero * incoming_zero, incoming_one, node.feature);
    Recurse(cold, depth + 1, path, cold_zero * incoming_zero, 0.0, node.feature);
  }

  const gbdt::RegressionTree& tree_;
  std::span<const data::Cell> x_;
  std::span<double> phi_;
  std::vector<PathElement> storage_;
};

}  // namespace

void TreeShapSingle(const gbdt::RegressionTree& tree, std::span<const data::Cell> x,
                    std::span<double> phi) {
  if (tree.node(0).is_leaf()) return;
  PathWalker(tree, x, phi).Run();
}

ShapReport TreeShap(const gbdt::BoostedEnsemble& model, std::span<const data::Cell> x) {
  ShapReport report;
  report.base_value = model.ExpectedValue();
  report.phi.assign(model.feature_names.size(), 0.0);
  for (const auto& tree : model.trees) TreeShapSingle(tree, x, report.phi);
  for (double& v : report.phi) v *= model.learning_rate;
  return report;
}

}  // namespace ntlwb::shap
