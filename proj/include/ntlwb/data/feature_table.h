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

#ifndef NTLWB_DATA_FEATURE_TABLE_H_
#define NTLWB_DATA_FEATURE_TABLE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ntlwb::data {

// A feature cell. std::nullopt is the MISSING state (e.g. a customer who was
// never visited has no LastVisit); it is never encoded as a sentinel number.
using Cell = std::optional<double>;
inline constexpr std::nullopt_t kMissing = std::nullopt;

enum class Partition { kTrain, kValidation, kTest };

std::string_view PartitionName(Partition partition);
std::optional<Partition> ParsePartition(std::string_view name);

struct FeatureColumn {
  std::string name;
  std::vector<Cell> values;
};

// Columnar labelled corpus. Immutable once built; the constructor enforces
// equal column lengths, unique names, non-negative finite labels and a split
// tag on every row.
class FeatureTable {
 public:
  FeatureTable() = default;
  FeatureTable(std::vector<std::string> customer_ids,
               std::vector<FeatureColumn> columns, std::vector<double> labels,
               std::vector<Partition> split, std::string provenance);

  std::size_t num_rows() const { return customer_ids_.size(); }
  std::size_t num_columns() const { return columns_.size(); }

  const std::vector<std::string>& customer_ids() const { return customer_ids_; }
  const std::vector<FeatureColumn>& columns() const { return columns_; }
  const std::vector<double>& labels() const { return labels_; }
  const std::vector<Partition>& split() const { return split_; }
  const std::string& provenance() const { return provenance_; }

  std::vector<std::string> column_names() const;
  // Index of the named column, or nullopt.
  std::optional<std::size_t> column_index(std::string_view name) const;
  const FeatureColumn& column(std::string_view name) const;
  std::optional<std::size_t> row_of(std::string_view customer_id) const;

  bool is_ntl(std::size_t row) const { return labels_[row] > 0.0; }
  std::size_t count_ntl() const;
  // Row indices tagged with `partition`, ascending.
  std::vector<std::size_t> rows_in(Partition partition) const;
  bool has_partition(Partition partition) const;

  FeatureTable with_split(std::vector<Partition> split) const;
  FeatureTable with_labels(std::vector<double> labels) const;
  // Subset of rows in the given order.
  FeatureTable select_rows(std::span<const std::size_t> rows) const;
  // Keeps only the named columns, in the given order.
  FeatureTable select_columns(std::span<const std::string> names) const;

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;

 private:
  std::vector<std::string> customer_ids_;
  std::vector<FeatureColumn> columns_;
  std::vector<double> labels_;
  std::vector<Partition> split_;
  std::string provenance_;
};

inline bool operator==(const FeatureColumn& a, const FeatureColumn& b) {
  return a.name == b.name && a.values == b.values;
}

}  // namespace ntlwb::data

#endif  // NTLWB_DATA_FEATURE_TABLE_H_
