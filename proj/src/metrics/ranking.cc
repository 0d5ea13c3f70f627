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

#include "ntlwb/metrics/ranking.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "ntlwb/util/error.h"

namespace ntlwb::metrics {
namespace {

void CheckLengths(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "scores and labels differ in length");
  }
}

}  // namespace

std::vector<std::size_t> RankByScore(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

RankedEval Rank(std::span<const double> scores, std::span<const double> labels,
                std::optional<std::size_t> depth) {
  CheckLengths(scores, labels);
  RankedEval eval;
  eval.ordering = RankByScore(scores);
  eval.gains.reserve(labels.size());
  for (const std::size_t row : eval.ordering) eval.gains.push_back(labels[row]);
  eval.depth = depth.value_or(labels.size());
  return eval;
}

double Dcg(std::span<const double> gains, std::optional<std::size_t> depth) {
  if (gains.empty()) throw Error(ErrorCode::kEmptyList, "DCG of an empty list");
  const std::size_t t = depth.value_or(gains.size());
  if (t > gains.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "truncation depth " + std::to_string(t) + " exceeds list length " +
                    std::to_string(gains.size()));
  }
  double total = 0;
  for (std::size_t i = 0; i < t; ++i) {
    total += gains[i] / std::log2(static_cast<double>(i) + 2.0);
  }
  return total;
}

std::optional<double> Ndcg(std::span<const double> scores, std::span<const double> labels,
                           std::optional<std::size_t> depth) {
  CheckLengths(scores, labels);
  const RankedEval eval = Rank(scores, labels, depth);
  std::vector<double> ideal(labels.begin(), labels.end());
  std::stable_sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = Dcg(ideal, depth);
  if (!(idcg > 0.0)) return std::nullopt;
  return Dcg(eval.gains, depth) / idcg;
}

double EnergyAtK(std::span<const double> scores, std::span<const double> labels, std::size_t k) {
  CheckLengths(scores, labels);
  if (k > labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "k exceeds the number of rows");
  }
  const auto order = RankByScore(scores);
  double total = 0;
  for (std::size_t i = 0; i < k; ++i) total += labels[order[i]];
  return total;
}

double PrecisionAtK(std::span<const double> scores, std::span<const double> labels,
                    std::size_t k) {
  CheckLengths(scores, labels);
  if (k == 0 || k > labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "k must lie in [1, rows]");
  }
  const auto order = RankByScore(scores);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += labels[order[i]] > 0.0 ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

std::string_view GuardVerdictName(GuardVerdict verdict) {
  return verdict == GuardVerdict::kAccept ? "accept" : "reject";
}

GuardVerdict Guard(double prev_ndcg, double new_ndcg, double max_drop) {
  const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(prev_ndcg) || !in_unit(new_ndcg)) {
    throw Error(ErrorCode::kInvalidArgument, "guard inputs must lie in [0, 1]");
  }
  return prev_ndcg - new_ndcg >= max_drop - kGuardTolerance ? GuardVerdict::kReject
                                                            : GuardVerdict::kAccept;
}

}  // namespace ntlwb::metrics
