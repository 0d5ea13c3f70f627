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

#include "ntlwb/gbdt/tree.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "ntlwb/util/error.h"

namespace ntlwb::gbdt {

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw Error(ErrorCode::kInvalidArgument, "tree without nodes");
  // Iterative walk; a malformed link is reported instead of followed.
  std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const auto [index, level] = stack.back();
    stack.pop_back();
    if (++visited > nodes_.size()) {
      throw Error(ErrorCode::kInvalidArgument, "tree links form a cycle");
    }
    depth_ = std::max(depth_, level);
    const TreeNode& n = nodes_[index];
    if (n.is_leaf()) continue;
    for (const std::int32_t child : {n.left, n.right}) {
      if (child < 0 || static_cast<std::size_t>(child) >= nodes_.size()) {
        throw Error(ErrorCode::kInvalidArgument, "tree child index out of range");
      }
      stack.emplace_back(child, level + 1);
    }
  }
}

RegressionTree RegressionTree::Leaf(double value, std::int64_t cover) {
  TreeNode leaf;
  leaf.value = value;
  leaf.cover = cover;
  return RegressionTree({leaf});
}

std::int32_t RegressionTree::LeafIndex(std::span<const data::Cell> row) const {
  std::int32_t index = 0;
  while (!nodes_[index].is_leaf()) index = Route(index, row[nodes_[index].feature]);
  return index;
}

double RegressionTree::ExpectedValue() const {
  double weighted = 0;
  for (const TreeNode& n : nodes_) {
    if (n.is_leaf()) weighted += n.value * static_cast<double>(n.cover);
  }
  return weighted / static_cast<double>(nodes_[0].cover);
}

void RegressionTree::Validate(std::size_t num_features) const {
  std::int32_t expected = 0;
  std::function<void(std::int32_t)> walk = [&](std::int32_t index) {
    if (index != expected || index < 0 || static_cast<std::size_t>(index) >= nodes_.size()) {
      throw Error(ErrorCode::kCorruptModel, "tree is not in preorder layout");
    }
    ++expected;
    const TreeNode& n = nodes_[index];
    if (n.cover < 1) throw Error(ErrorCode::kCorruptModel, "node with cover < 1");
    if (!std::isfinite(n.value)) throw Error(ErrorCode::kCorruptModel, "non-finite node value");
    if (n.is_leaf()) return;
    if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= num_features) {
      throw Error(ErrorCode::kCorruptModel,
                  "split on unknown feature index " + std::to_string(n.feature));
    }
    if (std::isnan(n.threshold)) throw Error(ErrorCode::kCorruptModel, "NaN threshold");
    walk(n.left);
    walk(n.right);
    if (nodes_[n.left].cover + nodes_[n.right].cover != n.cover) {
      throw Error(ErrorCode::kCorruptModel, "cover of a split differs from its children");
    }
  };
  walk(0);
  if (static_cast<std::size_t>(expected) != nodes_.size()) {
    throw Error(ErrorCode::kCorruptModel, "unreachable nodes in tree");
  }
}

}  // namespace ntlwb::gbdt
