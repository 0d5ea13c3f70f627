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

#ifndef NTLWB_DATA_COLUMN_STATS_H_
#define NTLWB_DATA_COLUMN_STATS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ntlwb/data/feature_table.h"

namespace ntlwb::data {

struct ColumnSummary {
  std::string name;
  std::size_t present = 0;
  double missing_rate = 0;
  // Unset when the column has no present cells.
  std::optional<double> min;
  std::optional<double> max;
  std::optional<double> mean;

  bool has_moments() const { return mean.has_value(); }
};

// MISSING cells are excluded from min/max/mean and counted in missing_rate.
std::vector<ColumnSummary> ColumnStats(const FeatureTable& table);

}  // namespace ntlwb::data

#endif  // NTLWB_DATA_COLUMN_STATS_H_
