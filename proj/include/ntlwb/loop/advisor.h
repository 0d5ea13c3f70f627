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

#ifndef NTLWB_LOOP_ADVISOR_H_
#define NTLWB_LOOP_ADVISOR_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ntlwb/data/feature_table.h"
#include "ntlwb/shap/summary.h"

namespace ntlwb::loop {

struct AdvisorConfig {
  double outlier_ratio = 3.0;
  double outlier_robust_z = 5.0;
  double low_importance_share = 0.01;
  double correlated_pearson = 0.9;
  double correlated_phi_spearman = 0.8;

  void Validate() const;
  friend bool operator==(const AdvisorConfig&, const AdvisorConfig&) = default;
};

struct OutlierFinding {
  std::string customer_id;
  double label = 0;
  // label / largest other NTL label; unset with a single NTL row.
  std::optional<double> ratio_to_second_max;
  // On log kWh with a 1.4826 * MAD scale; unset when MAD is zero.
  std::optional<double> robust_z;

  friend bool operator==(const OutlierFinding&, const OutlierFinding&) = default;
};

struct LowImportanceFinding {
  std::string feature;
  double share = 0;

  friend bool operator==(const LowImportanceFinding&, const LowImportanceFinding&) = default;
};

struct CorrelatedPair {
  std::string feature_a;
  std::string feature_b;
  double pearson = 0;
  double phi_spearman = 0;

  friend bool operator==(const CorrelatedPair&, const CorrelatedPair&) = default;
};

// Suggestions only. Outliers come first when reading the findings in order.
struct AdvisorFindings {
  std::vector<OutlierFinding> outliers;              // by label, descending
  std::vector<LowImportanceFinding> low_importance;  // by share, ascending
  std::vector<CorrelatedPair> correlated_pairs;      // by |pearson|, descending

  bool empty() const {
    return outliers.empty() && low_importance.empty() && correlated_pairs.empty();
  }
  friend bool operator==(const AdvisorFindings&, const AdvisorFindings&) = default;
};

// `training` carries the effective (possibly capped) labels the model was
// fitted on; `summary` explains those same rows.
AdvisorFindings Advise(const data::FeatureTable& training, const shap::GlobalShapSummary& summary,
                       const AdvisorConfig& config = {});

// Statistics shared with the comparison report.
std::optional<double> Pearson(std::span<const double> a, std::span<const double> b);
std::vector<double> AverageRanks(std::span<const double> values);
std::optional<double> Spearman(std::span<const double> a, std::span<const double> b);

}  // namespace ntlwb::loop

#endif  // NTLWB_LOOP_ADVISOR_H_
