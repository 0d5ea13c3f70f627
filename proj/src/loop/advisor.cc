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

#include "ntlwb/loop/advisor.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ntlwb/util/error.h"

namespace ntlwb::loop {
namespace {

double Median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<OutlierFinding> FindOutliers(const data::FeatureTable& training,
                                         const AdvisorConfig& config) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < training.num_rows(); ++r) {
    if (training.is_ntl(r)) rows.push_back(r);
  }
  if (rows.size() < 2) return {};
  const auto& labels = training.labels();

  // Largest and second-largest labels give every row's "largest other".
  std::size_t top = rows[0];
  for (const auto r : rows) {
    if (labels[r] > labels[top]) top = r;
  }
  double runner_up = 0;
  for (const auto r : rows) {
    if (r != top) runner_up = std::max(runner_up, labels[r]);
  }

  std::vector<double> logs;
  logs.reserve(rows.size());
  for (const auto r : rows) logs.push_back(std::log(labels[r]));
  const double center = Median(logs);
  std::vector<double> deviations;
  deviations.reserve(logs.size());
  for (const double v : logs) deviations.push_back(std::abs(v - center));
  const double scale = 1.4826 * Median(deviations);

  std::vector<OutlierFinding> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    OutlierFinding finding;
    finding.customer_id = training.customer_ids()[r];
    finding.label = labels[r];
    finding.ratio_to_second_max = labels[r] / (r == top ? runner_up : labels[top]);
    if (scale > 0) finding.robust_z = (logs[i] - center) / scale;
    const bool by_ratio = *finding.ratio_to_second_max >= config.outlier_ratio;
    const bool by_z = finding.robust_z && *finding.robust_z > config.outlier_robust_z;
    if (by_ratio || by_z) out.push_back(std::move(finding));
  }
  std::sort(out.begin(), out.end(), [](const OutlierFinding& a, const OutlierFinding& b) {
    if (a.label != b.label) return a.label > b.label;
    return a.customer_id < b.customer_id;
  });
  return out;
}

std::vector<LowImportanceFinding> FindLowImportance(const shap::GlobalShapSummary& summary,
                                                    const AdvisorConfig& config) {
  const double total = std::accumulate(summary.importance.begin(), summary.importance.end(), 0.0);
  if (!(total > 0)) return {};
  std::vector<std::size_t> flagged;
  for (std::size_t f = 0; f < summary.num_features(); ++f) {
    if (summary.importance[f] / total < config.low_importance_share) flagged.push_back(f);
  }
  std::stable_sort(flagged.begin(), flagged.end(), [&](std::size_t a, std::size_t b) {
    return summary.importance[a] < summary.importance[b];
  });
  std::vector<LowImportanceFinding> out;
  for (const auto f : flagged) {
    out.push_back({summary.feature_names[f], summary.importance[f] / total});
  }
  return out;
}

std::vector<CorrelatedPair> FindCorrelatedPairs(const shap::GlobalShapSummary& summary,
                                                const AdvisorConfig& config) {
  const std::size_t p = summary.num_features();
  const std::size_t n = summary.num_rows();
  std::vector<CorrelatedPair> out;
  std::vector<double> a, b;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      // Raw values over rows where both are present.
      a.clear();
      b.clear();
      for (std::size_t r = 0; r < n; ++r) {
        const auto& x = summary.raw[r * p + i];
        const auto& y = summary.raw[r * p + j];
        if (x && y) {
          a.push_back(*x);
          b.push_back(*y);
        }
      }
      const auto r = Pearson(a, b);
      if (!r || std::abs(*r) <= config.correlated_pearson) continue;
      const auto rho = Spearman(summary.phi_column(i), summary.phi_column(j));
      if (!rho || *rho <= config.correlated_phi_spearman) continue;
      out.push_back({summary.feature_names[i], summary.feature_names[j], *r, *rho});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const CorrelatedPair& x, const CorrelatedPair& y) {
    return std::abs(x.pearson) > std::abs(y.pearson);
  });
  return out;
}

}  // namespace

void AdvisorConfig::Validate() const {
  const bool ok = outlier_ratio > 1 && outlier_robust_z > 0 && low_importance_share >= 0 &&
                  low_importance_share < 1 && correlated_pearson >= 0 && correlated_pearson < 1 &&
                  correlated_phi_spearman >= -1 && correlated_phi_spearman < 1;
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "advisor thresholds out of range");
}

std::optional<double> Pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 3) return std::nullopt;
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(va > 0) || !(vb > 0)) return std::nullopt;
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

std::vector<double> AverageRanks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> Spearman(std::span<const double> a, std::span<const double> b) {
  return Pearson(AverageRanks(a), AverageRanks(b));
}

AdvisorFindings Advise(const data::FeatureTable& training, const shap::GlobalShapSummary& summary,
                       const AdvisorConfig& config) {
  config.Validate();
  AdvisorFindings findings;
  findings.outliers = FindOutliers(training, config);
  findings.low_importance = FindLowImportance(summary, config);
  findings.correlated_pairs = FindCorrelatedPairs(summary, config);
  return findings;
}

}  // namespace ntlwb::loop
