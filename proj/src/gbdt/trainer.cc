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

#include "ntlwb/gbdt/trainer.h"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "ntlwb/util/error.h"
#include "ntlwb/util/parallel.h"

namespace ntlwb::gbdt {
namespace {

// Present rows of one feature, ascending by value (ties by row index).
struct SortedColumn {
  std::vector<std::uint32_t> rows;
  std::vector<double> values;
};

struct Candidate {
  bool valid = false;
  double gain = 0;
  std::int32_t feature = TreeNode::kLeaf;
  double threshold = 0;
  MissingGoes missing_goes = MissingGoes::kRight;
};

struct GrowNode {
  std::int32_t feature = TreeNode::kLeaf;
  double threshold = 0;
  MissingGoes missing_goes = MissingGoes::kRight;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double sum = 0;
  std::int64_t count = 0;
};

struct Stats {
  double sum = 0;
  std::int64_t count = 0;
};

double Score(double sum, std::int64_t count) {
  return sum * sum / static_cast<double>(count);
}

class TreeGrower {
 public:
  TreeGrower(const data::FeatureTable& table, const std::vector<SortedColumn>& sorted,
             const TrainConfig& cfg)
      : table_(table), sorted_(sorted), cfg_(cfg), row_node_(table.num_rows(), 0) {}

  RegressionTree Grow(const std::vector<double>& residual) {
    residual_ = &residual;
    std::fill(row_node_.begin(), row_node_.end(), 0);
    nodes_.clear();
    GrowNode root;
    for (const double r : residual) root.sum += r;
    root.count = static_cast<std::int64_t>(residual.size());
    nodes_.push_back(root);

    std::vector<std::int32_t> frontier{0};
    for (std::size_t depth = 0; depth < cfg_.max_depth && !frontier.empty(); ++depth) {
      frontier = SplitLevel(frontier);
    }
    return ToPreorder();
  }

 private:
  std::vector<std::int32_t> SplitLevel(const std::vector<std::int32_t>& frontier) {
    std::vector<std::int32_t> slot_of(nodes_.size(), -1);
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      slot_of[frontier[k]] = static_cast<std::int32_t>(k);
    }
    const std::size_t num_features = sorted_.size();
    std::vector<std::vector<Candidate>> per_feature(num_features);
    ParallelFor(num_features, [&](std::size_t f) {
      per_feature[f] = BestSplitsForFeature(static_cast<std::int32_t>(f), frontier, slot_of);
    });

    std::vector<Candidate> best(frontier.size());
    for (std::size_t f = 0; f < num_features; ++f) {
      for (std::size_t k = 0; k < frontier.size(); ++k) {
        const Candidate& c = per_feature[f][k];
        if (c.valid && (!best[k].valid || c.gain > best[k].gain)) best[k] = c;
      }
    }

    std::vector<std::int32_t> next;
    std::vector<std::int32_t> left_of(nodes_.size(), -1);
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      if (!best[k].valid) continue;
      const std::int32_t id = frontier[k];
      const auto left = static_cast<std::int32_t>(nodes_.size());
      nodes_.emplace_back();
      nodes_.emplace_back();
      GrowNode& node = nodes_[id];
      node.feature = best[k].feature;
      node.threshold = best[k].threshold;
      node.missing_goes = best[k].missing_goes;
      node.left = left;
      node.right = left + 1;
      left_of[id] = left;
      next.push_back(left);
      next.push_back(left + 1);
    }
    if (next.empty()) return next;

    const auto& residual = *residual_;
    for (std::size_t r = 0; r < row_node_.size(); ++r) {
      const std::int32_t id = row_node_[r];
      if (static_cast<std::size_t>(id) >= left_of.size() || left_of[id] < 0) continue;
      const GrowNode& node = nodes_[id];
      const data::Cell& cell = table_.columns()[node.feature].values[r];
      const bool go_left = cell ? *cell < node.threshold
                                : node.missing_goes == MissingGoes::kLeft;
      const std::int32_t child = go_left ? node.left : node.right;
      row_node_[r] = child;
      nodes_[child].sum += residual[r];
      nodes_[child].count += 1;
    }
    return next;
  }

  std::vector<Candidate> BestSplitsForFeature(std::int32_t feature,
                                              const std::vector<std::int32_t>& frontier,
                                              const std::vector<std::int32_t>& slot_of) const {
    const auto& residual = *residual_;
    const SortedColumn& column = sorted_[feature];
    const std::size_t slots = frontier.size();
    std::vector<Stats> present(slots);
    for (const std::uint32_t r : column.rows) {
      const std::int32_t k = slot_of[row_node_[r]];
      if (k < 0) continue;
      present[k].sum += residual[r];
      present[k].count += 1;
    }

    std::vector<Candidate> best(slots);
    std::vector<Stats> running(slots);
    std::vector<double> last(slots, 0.0);
    std::vector<bool> seen(slots, false);
    for (std::size_t i = 0; i < column.rows.size(); ++i) {
      const std::uint32_t r = column.rows[i];
      const std::int32_t k = slot_of[row_node_[r]];
      if (k < 0) continue;
      const double value = column.values[i];
      if (seen[k] && value > last[k]) {
        double threshold = last[k] + (value - last[k]) / 2.0;
        if (!(threshold > last[k])) threshold = value;
        Consider(best[k], nodes_[frontier[k]], present[k], running[k], feature, threshold);
      }
      running[k].sum += residual[r];
      running[k].count += 1;
      last[k] = value;
      seen[k] = true;
    }
    // Present rows left, MISSING rows right.
    for (std::size_t k = 0; k < slots; ++k) {
      const GrowNode& node = nodes_[frontier[k]];
      if (present[k].count == 0 || present[k].count == node.count) continue;
      const Stats left = present[k];
      const Stats right{node.sum - present[k].sum, node.count - present[k].count};
      Offer(best[k], node, left, right, feature,
            std::numeric_limits<double>::infinity(), MissingGoes::kRight);
    }
    return best;
  }

  // Evaluates threshold with `left_present` rows below it, placing MISSING
  // rows on either side.
  void Consider(Candidate& best, const GrowNode& node, const Stats& present,
                const Stats& left_present, std::int32_t feature, double threshold) const {
    const Stats right_present{present.sum - left_present.sum,
                              present.count - left_present.count};
    const Stats missing{node.sum - present.sum, node.count - present.count};
    if (missing.count == 0) {
      const MissingGoes larger = left_present.count >= right_present.count
                                     ? MissingGoes::kLeft
                                     : MissingGoes::kRight;
      Offer(best, node, left_present, right_present, feature, threshold, larger);
      return;
    }
    Offer(best, node,
          {left_present.sum + missing.sum, left_present.count + missing.count},
          right_present, feature, threshold, MissingGoes::kLeft);
    Offer(best, node, left_present,
          {right_present.sum + missing.sum, right_present.count + missing.count}, feature,
          threshold, MissingGoes::kRight);
  }

  void Offer(Candidate& best, const GrowNode& node, const Stats& left, const Stats& right,
             std::int32_t feature, double threshold, MissingGoes missing_goes) const {
    if (left.count < cfg_.min_child_cover || right.count < cfg_.min_child_cover) return;
    const double gain =
        Score(left.sum, left.count) + Score(right.sum, right.count) - Score(node.sum, node.count);
    if (!(gain > 0.0)) return;
    if (best.valid && !(gain > best.gain)) return;
    best = {true, gain, feature, threshold, missing_goes};
  }

  RegressionTree ToPreorder() const {
    std::vector<TreeNode> out;
    out.reserve(nodes_.size());
    std::function<std::int32_t(std::int32_t)> emit = [&](std::int32_t id) -> std::int32_t {
      const GrowNode& g = nodes_[id];
      const auto index = static_cast<std::int32_t>(out.size());
      TreeNode n;
      n.value = g.sum / static_cast<double>(g.count);
      n.cover = g.count;
      out.push_back(n);
      if (g.feature != TreeNode::kLeaf) {
        const std::int32_t left = emit(g.left);
        const std::int32_t right = emit(g.right);
        TreeNode& split = out[index];
        split.feature = g.feature;
        split.threshold = g.threshold;
        split.missing_goes = g.missing_goes;
        split.left = left;
        split.right = right;
      }
      return index;
    };
    emit(0);
    return RegressionTree(std::move(out));
  }

  const data::FeatureTable& table_;
  const std::vector<SortedColumn>& sorted_;
  const TrainConfig& cfg_;
  const std::vector<double>* residual_ = nullptr;
  std::vector<std::int32_t> row_node_;
  std::vector<GrowNode> nodes_;
};

std::vector<SortedColumn> SortColumns(const data::FeatureTable& table) {
  std::vector<SortedColumn> sorted(table.num_columns());
  ParallelFor(table.num_columns(), [&](std::size_t f) {
    const auto& values = table.columns()[f].values;
    SortedColumn& out = sorted[f];
    for (std::size_t r = 0; r < values.size(); ++r) {
      if (values[r]) out.rows.push_back(static_cast<std::uint32_t>(r));
    }
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return *values[a] < *values[b]; });
    out.values.reserve(out.rows.size());
    for (const std::uint32_t r : out.rows) out.values.push_back(*values[r]);
  });
  return sorted;
}

}  // namespace

BoostedEnsemble Fit(const data::FeatureTable& train, const TrainConfig& cfg) {
  cfg.Validate();
  const std::size_t n = train.num_rows();
  if (train.num_columns() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "training needs at least one feature column");
  }
  if (n < static_cast<std::size_t>(2 * cfg.min_child_cover)) {
    throw Error(ErrorCode::kInvalidArgument,
                "training needs at least 2*min_child_cover rows, got " + std::to_string(n));
  }
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "too many training rows");
  }

  const auto& labels = train.labels();
  BoostedEnsemble model;
  model.feature_names = train.column_names();
  model.learning_rate = cfg.learning_rate;
  model.config = cfg;

  const bool constant = std::all_of(labels.begin(), labels.end(),
                                    [&](double y) { return y == labels.front(); });
  if (constant) {
    model.base_score = labels.front();
    model.trees.assign(cfg.n_trees, RegressionTree::Leaf(0.0, static_cast<std::int64_t>(n)));
    return model;
  }
  model.base_score = std::accumulate(labels.begin(), labels.end(), 0.0) / static_cast<double>(n);

  const std::vector<SortedColumn> sorted = SortColumns(train);
  TreeGrower grower(train, sorted, cfg);
  std::vector<double> prediction(n, model.base_score);
  std::vector<double> residual(n);
  std::vector<data::Cell> row(train.num_columns());
  model.trees.reserve(cfg.n_trees);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    for (std::size_t r = 0; r < n; ++r) residual[r] = labels[r] - prediction[r];
    RegressionTree tree = grower.Grow(residual);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t f = 0; f < row.size(); ++f) row[f] = train.columns()[f].values[r];
      prediction[r] += cfg.learning_rate * tree.Predict(row);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace ntlwb::gbdt
