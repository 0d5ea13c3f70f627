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

#include "ntlwb/data/csv.h"

#include <fstream>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "ntlwb/util/error.h"
#include "ntlwb/util/text.h"

namespace ntlwb::data {

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

FeatureTable LoadCsv(const std::filesystem::path& path, const CsvSchema& schema) {
  const std::string text = ReadFile(path);
  return ParseCsv(text, schema, "csv:" + HexDigest(Fnv1a64(text)));
}

FeatureTable ParseCsv(std::string_view text, const CsvSchema& schema,
                      std::string provenance) {
  if (provenance.empty()) provenance = "csv:" + HexDigest(Fnv1a64(text));

  std::vector<std::string_view> lines;
  for (std::string_view line : SplitFields(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::kMalformedCsv, "missing header row");

  std::string_view header_line = lines[0];
  if (header_line.starts_with("\xEF\xBB\xBF")) header_line.remove_prefix(3);
  const auto header = SplitFields(header_line, ',');

  std::optional<std::size_t> id_col, label_col, split_col;
  std::vector<std::size_t> feature_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string_view name = Trim(header[i]);
    if (name.empty()) {
      throw Error(ErrorCode::kMalformedCsv,
                  "empty column name at header position " + std::to_string(i));
    }
    if (name == schema.id_column) {
      id_col = i;
    } else if (name == schema.label_column) {
      label_col = i;
    } else if (name == schema.split_column) {
      split_col = i;
    } else {
      feature_cols.push_back(i);
    }
  }
  if (!id_col) {
    throw Error(ErrorCode::kMalformedCsv, "header lacks '" + schema.id_column + "'");
  }
  if (!label_col) {
    throw Error(ErrorCode::kMalformedCsv, "header lacks '" + schema.label_column + "'");
  }

  std::vector<std::string> ids;
  std::vector<double> labels;
  std::vector<Partition> split;
  std::vector<FeatureColumn> columns;
  for (const std::size_t col : feature_cols) {
    columns.push_back({std::string(Trim(header[col])), {}});
  }

  for (std::size_t line_no = 1; line_no < lines.size(); ++line_no) {
    const std::size_t row = line_no - 1;
    const auto fields = SplitFields(lines[line_no], ',');
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kMalformedCsv,
                  "line " + std::to_string(line_no + 1) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(header.size()));
    }
    const std::string_view id = Trim(fields[*id_col]);
    if (id.empty()) {
      throw Error(ErrorCode::kMalformedCsv,
                  "empty customer id on line " + std::to_string(line_no + 1));
    }
    ids.emplace_back(id);

    const auto label = ParseDouble(fields[*label_col]);
    if (!label) {
      throw Error(ErrorCode::kNonNumericCell,
                  "column '" + schema.label_column + "' row " + std::to_string(row) +
                      ": '" + std::string(fields[*label_col]) + "' is not numeric");
    }
    if (*label < 0) {
      throw Error(ErrorCode::kNegativeLabel,
                  "row " + std::to_string(row) + " (" + std::string(id) +
                      ") has negative label");
    }
    labels.push_back(*label);

    if (split_col) {
      const auto tag = ParsePartition(Trim(fields[*split_col]));
      if (!tag) {
        throw Error(ErrorCode::kMalformedCsv,
                    "line " + std::to_string(line_no + 1) + ": bad split tag '" +
                        std::string(fields[*split_col]) + "'");
      }
      split.push_back(*tag);
    } else {
      split.push_back(Partition::kTrain);
    }

    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      const std::string_view raw = Trim(fields[feature_cols[f]]);
      if (raw.empty()) {
        columns[f].values.push_back(kMissing);
        continue;
      }
      const auto value = ParseDouble(raw);
      if (!value) {
        throw Error(ErrorCode::kNonNumericCell,
                    "column '" + columns[f].name + "' row " + std::to_string(row) +
                        ": '" + std::string(raw) + "' is not numeric");
      }
      columns[f].values.push_back(*value);
    }
  }
  return FeatureTable(std::move(ids), std::move(columns), std::move(labels),
                      std::move(split), std::move(provenance));
}

std::string FormatCsv(const FeatureTable& table, bool include_split) {
  std::string out = "customer_id";
  for (const auto& column : table.columns()) {
    out += ',';
    out += column.name;
  }
  out += ",label_kwh";
  if (include_split) out += ",split";
  out += '\n';
  for (std::size_t row = 0; row < table.num_rows(); ++row) {
    out += table.customer_ids()[row];
    for (const auto& column : table.columns()) {
      out += ',';
      if (const Cell& cell = column.values[row]) out += FormatDouble(*cell);
    }
    out += ',';
    out += FormatDouble(table.labels()[row]);
    if (include_split) {
      out += ',';
      out += PartitionName(table.split()[row]);
    }
    out += '\n';
  }
  return out;
}

void WriteCsv(const FeatureTable& table, const std::filesystem::path& path,
              bool include_split) {
  WriteFile(path, FormatCsv(table, include_split));
}

}  // namespace ntlwb::data
