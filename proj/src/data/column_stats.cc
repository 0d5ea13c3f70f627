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

#include "ntlwb/data/column_stats.h"

#include <algorithm>

namespace ntlwb::data {

std::vector<ColumnSummary> ColumnStats(const FeatureTable& table) {
  std::vector<ColumnSummary> out;
  out.reserve(table.num_columns());
  for (const auto& column : table.columns()) {
    ColumnSummary summary;
    summary.name = column.name;
    double sum = 0;
    for (const Cell& cell : column.values) {
      if (!cell) continue;
      ++summary.present;
      sum += *cell;
      summary.min = summary.min ? std::min(*summary.min, *cell) : *cell;
      summary.max = summary.max ? std::max(*summary.max, *cell) : *cell;
    }
    const std::size_t rows = column.values.size();
    summary.missing_rate =
        rows == 0 ? 0.0 : static_cast<double>(rows - summary.present) / static_cast<double>(rows);
    if (summary.present > 0) summary.mean = sum / static_cast<double>(summary.present);
    out.push_back(std::move(summary));
  }
  return out;
}

}  // namespace ntlwb::data
