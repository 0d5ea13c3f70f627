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

#include "ntlwb/shap/summary.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ntlwb/util/error.h"
#include "ntlwb/util/parallel.h"
#include "ntlwb/util/text.h"

namespace ntlwb::shap {

std::vector<double> GlobalShapSummary::phi_column(std::size_t feature) const {
  std::vector<double> out(num_rows());
  for (std::size_t r = 0; r < num_rows(); ++r) out[r] = phi_at(r, feature);
  return out;
}

double GlobalShapSummary::max_abs_phi() const {
  double best = 0;
  for (const double v : phi) best = std::max(best, std::abs(v));
  return best;
}

std::optional<double> GlobalShapSummary::importance_of(const std::string& feature) const {
  for (std::size_t f = 0; f < feature_names.size(); ++f) {
    if (feature_names[f] == feature) return importance[f];
  }
  return std::nullopt;
}

std::vector<BeeswarmPoint> GlobalShapSummary::points() const {
  const std::size_t p = num_features();
  std::vector<double> lo(p, 0.0), hi(p, 0.0);
  std::vector<bool> any(p, false);
  for (std::size_t r = 0; r < num_rows(); ++r) {
    for (std::size_t f = 0; f < p; ++f) {
      const data::Cell& cell = raw[r * p + f];
      if (!cell) continue;
      lo[f] = any[f] ? std::min(lo[f], *cell) : *cell;
      hi[f] = any[f] ? std::max(hi[f], *cell) : *cell;
      any[f] = true;
    }
  }
  std::vector<BeeswarmPoint> out;
  out.reserve(num_rows() * p);
  for (const std::size_t f : feature_order) {
    for (std::size_t r = 0; r < num_rows(); ++r) {
      BeeswarmPoint point{f, r, phi_at(r, f), raw[r * p + f], std::nullopt};
      if (point.raw) {
        point.normalized = hi[f] > lo[f] ? (*point.raw - lo[f]) / (hi[f] - lo[f]) : 0.5;
      }
      out.push_back(point);
    }
  }
  return out;
}

GlobalShapSummary Summarize(const gbdt::BoostedEnsemble& model, const data::FeatureTable& rows) {
  if (rows.num_rows() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot summarize an empty row set");
  }
  const auto matrix = gbdt::FeatureMatrix::FromTable(rows, model.feature_names);
  const std::size_t n = rows.num_rows();
  const std::size_t p = model.feature_names.size();

  GlobalShapSummary summary;
  summary.feature_names = model.feature_names;
  summary.row_refs = rows.customer_ids();
  summary.base_value = model.ExpectedValue();
  summary.predictions.resize(n);
  summary.phi.resize(n * p);
  summary.raw.resize(n * p);
  ParallelFor(n, [&](std::size_t r) {
    const auto row = matrix.row(r);
    const ShapReport report = TreeShap(model, row);
    std::copy(report.phi.begin(), report.phi.end(), summary.phi.begin() + r * p);
    std::copy(row.begin(), row.end(), summary.raw.begin() + r * p);
    summary.predictions[r] = model.Predict(row);
  });

  summary.importance.assign(p, 0.0);
  for (std::size_t f = 0; f < p; ++f) {
    double total = 0;
    for (std::size_t r = 0; r < n; ++r) total += std::abs(summary.phi[r * p + f]);
    summary.importance[f] = total / static_cast<double>(n);
  }
  summary.feature_order.resize(p);
  std::iota(summary.feature_order.begin(), summary.feature_order.end(), 0);
  std::stable_sort(summary.feature_order.begin(), summary.feature_order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return summary.importance[a] > summary.importance[b];
                   });
  return summary;
}

std::vector<std::size_t> TopScoredRows(std::span<const double> scores,
                                       std::span<const std::string> ids, std::size_t k) {
  if (k > scores.size()) {
    throw Error(ErrorCode::kInvalidArgument, "k exceeds the number of rows");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  order.resize(k);
  return order;
}

GlobalShapSummary TopScoredSummary(const gbdt::BoostedEnsemble& model,
                                   const data::FeatureTable& rows, std::size_t k) {
  const auto scores = gbdt::Predict(model, rows);
  const auto top = TopScoredRows(scores, rows.customer_ids(), k);
  return Summarize(model, rows.select_rows(top));
}

std::string FormatSummaryCsv(const GlobalShapSummary& summary) {
  std::string out = "feature,row_ref,phi,raw_value,normalized_value\n";
  for (const auto& point : summary.points()) {
    out += summary.feature_names[point.feature];
    out += ',';
    out += summary.row_refs[point.row];
    out += ',';
    out += FormatDouble(point.phi);
    out += ',';
    if (point.raw) out += FormatDouble(*point.raw);
    out += ',';
    if (point.normalized) out += FormatDouble(*point.normalized);
    out += '\n';
  }
  return out;
}

std::string FormatImportanceCsv(const GlobalShapSummary& summary) {
  std::string out = "feature,mean_abs_phi\n";
  for (const std::size_t f : summary.feature_order) {
    out += summary.feature_names[f] + "," + FormatDouble(summary.importance[f]) + "\n";
  }
  return out;
}

}  // namespace ntlwb::shap
