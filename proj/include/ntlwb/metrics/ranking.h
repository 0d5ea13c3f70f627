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

#ifndef NTLWB_METRICS_RANKING_H_
#define NTLWB_METRICS_RANKING_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ntlwb::metrics {

// A score ordering with its kWh gains.
struct RankedEval {
  std::vector<std::size_t> ordering;  // row indices, best first
  std::vector<double> gains;          // label at each rank position
  std::size_t depth = 0;              // truncation t
};

// Row indices by descending score; equal scores keep row order.
std::vector<std::size_t> RankByScore(std::span<const double> scores);
RankedEval Rank(std::span<const double> scores, std::span<const double> labels,
                std::optional<std::size_t> depth = std::nullopt);

// sum_{i=1..t} gains_i / log2(i + 1). t defaults to the full list.
double Dcg(std::span<const double> gains, std::optional<std::size_t> depth = std::nullopt);

// DCG of the score ordering over DCG of the descending-label ordering.
// nullopt when every label is zero (iDCG = 0, NDCG undefined).
std::optional<double> Ndcg(std::span<const double> scores, std::span<const double> labels,
                           std::optional<std::size_t> depth = std::nullopt);

// Total kWh among the k highest-scoring rows.
double EnergyAtK(std::span<const double> scores, std::span<const double> labels, std::size_t k);

// Share of NTL rows among the top k. Diagnostic only; never used by the guard.
double PrecisionAtK(std::span<const double> scores, std::span<const double> labels,
                    std::size_t k);

enum class GuardVerdict { kAccept, kReject };

std::string_view GuardVerdictName(GuardVerdict verdict);

inline constexpr double kGuardMaxDrop = 0.1;
// Slack for decimal inputs: 0.44 - 0.34 evaluates to 0.09999999999999998.
inline constexpr double kGuardTolerance = 1e-9;

// Rejects iff prev_ndcg - new_ndcg >= max_drop.
GuardVerdict Guard(double prev_ndcg, double new_ndcg, double max_drop = kGuardMaxDrop);

}  // namespace ntlwb::metrics

#endif  // NTLWB_METRICS_RANKING_H_
