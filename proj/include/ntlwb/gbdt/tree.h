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

#ifndef NTLWB_GBDT_TREE_H_
#define NTLWB_GBDT_TREE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ntlwb/data/feature_table.h"

namespace ntlwb::gbdt {

enum class MissingGoes : std::uint8_t { kLeft, kRight };

// One node of a regression tree. A leaf has feature == kLeaf. Rows with
// x[feature] < threshold go left; MISSING follows missing_goes.
struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t feature = kLeaf;
  double threshold = 0;
  MissingGoes missing_goes = MissingGoes::kRight;
  std::int32_t left = -1;
  std::int32_t right = -1;
  // Mean residual of the rows reaching the node; the output at leaves.
  double value = 0;
  // Number of training rows that reached the node.
  std::int64_t cover = 0;

  bool is_leaf() const { return feature == kLeaf; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Nodes are stored in preorder: root at 0, a split's left subtree directly
// after it.
class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes);

  static RegressionTree Leaf(double value, std::int64_t cover);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(std::int32_t index) const { return nodes_[index]; }
  std::size_t size() const { return nodes_.size(); }
  // Number of split levels on the longest root-to-leaf path.
  std::size_t depth() const { return depth_; }

  // Child index taken by a cell at split node `index`.
  std::int32_t Route(std::int32_t index, const data::Cell& cell) const {
    const TreeNode& n = nodes_[index];
    if (!cell) return n.missing_goes == MissingGoes::kLeft ? n.left : n.right;
    return *cell < n.threshold ? n.left : n.right;
  }

  std::int32_t LeafIndex(std::span<const data::Cell> row) const;
  double Predict(std::span<const data::Cell> row) const {
    return nodes_[LeafIndex(row)].value;
  }

  // Cover-weighted mean of the leaf values.
  double ExpectedValue() const;

  // Checks cover(split) = cover(left) + cover(right), cover >= 1, finite values
  // and preorder layout. Throws on violation.
  void Validate(std::size_t num_features) const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t depth_ = 0;
};

}  // namespace ntlwb::gbdt

#endif  // NTLWB_GBDT_TREE_H_
