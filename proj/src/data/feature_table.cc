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

#include "ntlwb/data/feature_table.h"

#include <cmath>
#include <unordered_set>
#include <utility>

#include "ntlwb/util/error.h"

namespace ntlwb::data {

std::string_view PartitionName(Partition partition) {
  switch (partition) {
    case Partition::kTrain: return "train";
    case Partition::kValidation: return "validation";
    case Partition::kTest: return "test";
  }
  return "train";
}

std::optional<Partition> ParsePartition(std::string_view name) {
  if (name == "train") return Partition::kTrain;
  if (name == "validation") return Partition::kValidation;
  if (name == "test") return Partition::kTest;
  return std::nullopt;
}

FeatureTable::FeatureTable(std::vector<std::string> customer_ids,
                           std::vector<FeatureColumn> columns,
                           std::vector<double> labels,
                           std::vector<Partition> split,
                           std::string provenance)
    : customer_ids_(std::move(customer_ids)),
      columns_(std::move(columns)),
      labels_(std::move(labels)),
      split_(std::move(split)),
      provenance_(std::move(provenance)) {
  const std::size_t rows = customer_ids_.size();
  if (labels_.size() != rows) {
    throw Error(ErrorCode::kInvalidArgument,
                "label count " + std::to_string(labels_.size()) +
                    " does not match row count " + std::to_string(rows));
  }
  if (split_.size() != rows) {
    throw Error(ErrorCode::kInvalidArgument,
                "split tag count does not match row count");
  }
  std::unordered_set<std::string_view> names;
  for (const auto& column : columns_) {
    if (column.values.size() != rows) {
      throw Error(ErrorCode::kInvalidArgument,
                  "column '" + column.name + "' has " +
                      std::to_string(column.values.size()) + " rows, expected " +
                      std::to_string(rows));
    }
    if (!names.insert(column.name).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate column name '" + column.name + "'");
    }
    for (const Cell& cell : column.values) {
      if (cell && !std::isfinite(*cell)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "non-finite value in column '" + column.name + "'");
      }
    }
  }
  for (std::size_t row = 0; row < rows; ++row) {
    if (!(labels_[row] >= 0.0) || !std::isfinite(labels_[row])) {
      throw Error(ErrorCode::kNegativeLabel,
                  "label of row " + std::to_string(row) + " (" +
                      customer_ids_[row] + ") is negative or not finite");
    }
  }
  std::unordered_set<std::string_view> ids;
  for (const auto& id : customer_ids_) {
    if (!ids.insert(id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate customer id '" + id + "'");
    }
  }
}

std::vector<std::string> FeatureTable::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns_.size());
  for (const auto& column : columns_) names.push_back(column.name);
  return names;
}

std::optional<std::size_t> FeatureTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

const FeatureColumn& FeatureTable::column(std::string_view name) const {
  const auto index = column_index(name);
  if (!index) {
    throw Error(ErrorCode::kMissingColumn, "no column named '" + std::string(name) + "'");
  }
  return columns_[*index];
}

std::optional<std::size_t> FeatureTable::row_of(std::string_view customer_id) const {
  for (std::size_t row = 0; row < customer_ids_.size(); ++row) {
    if (customer_ids_[row] == customer_id) return row;
  }
  return std::nullopt;
}

std::size_t FeatureTable::count_ntl() const {
  std::size_t count = 0;
  for (const double label : labels_) count += label > 0.0 ? 1 : 0;
  return count;
}

std::vector<std::size_t> FeatureTable::rows_in(Partition partition) const {
  std::vector<std::size_t> rows;
  for (std::size_t row = 0; row < split_.size(); ++row) {
    if (split_[row] == partition) rows.push_back(row);
  }
  return rows;
}

bool FeatureTable::has_partition(Partition partition) const {
  for (const Partition p : split_) {
    if (p == partition) return true;
  }
  return false;
}

FeatureTable FeatureTable::with_split(std::vector<Partition> split) const {
  return FeatureTable(customer_ids_, columns_, labels_, std::move(split), provenance_);
}

FeatureTable FeatureTable::with_labels(std::vector<double> labels) const {
  return FeatureTable(customer_ids_, columns_, std::move(labels), split_, provenance_);
}

FeatureTable FeatureTable::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<double> labels;
  std::vector<Partition> split;
  ids.reserve(rows.size());
  labels.reserve(rows.size());
  split.reserve(rows.size());
  for (const std::size_t row : rows) {
    if (row >= num_rows()) {
      throw Error(ErrorCode::kInvalidArgument, "row index out of range");
    }
    ids.push_back(customer_ids_[row]);
    labels.push_back(labels_[row]);
    split.push_back(split_[row]);
  }
  std::vector<FeatureColumn> columns;
  columns.reserve(columns_.size());
  for (const auto& column : columns_) {
    FeatureColumn selected{column.name, {}};
    selected.values.reserve(rows.size());
    for (const std::size_t row : rows) selected.values.push_back(column.values[row]);
    columns.push_back(std::move(selected));
  }
  return FeatureTable(std::move(ids), std::move(columns), std::move(labels),
                      std::move(split), provenance_);
}

FeatureTable FeatureTable::select_columns(std::span<const std::string> names) const {
  std::vector<FeatureColumn> columns;
  columns.reserve(names.size());
  for (const auto& name : names) columns.push_back(column(name));
  return FeatureTable(customer_ids_, std::move(columns), labels_, split_, provenance_);
}

}  // namespace ntlwb::data
