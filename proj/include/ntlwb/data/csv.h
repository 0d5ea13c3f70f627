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

#ifndef NTLWB_DATA_CSV_H_
#define NTLWB_DATA_CSV_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "ntlwb/data/feature_table.h"

namespace ntlwb::data {

// Column roles. Every other header column is a numeric feature.
struct CsvSchema {
  std::string id_column = "customer_id";
  std::string label_column = "label_kwh";
  std::string split_column = "split";
};

// Parses `customer_id,<features...>,label_kwh[,split]`. Empty feature cells
// become MISSING. Without a split column every row is tagged train.
FeatureTable LoadCsv(const std::filesystem::path& path, const CsvSchema& schema = {});
FeatureTable ParseCsv(std::string_view text, const CsvSchema& schema = {},
                      std::string provenance = {});

// Inverse of ParseCsv; doubles use the shortest round-trip representation.
std::string FormatCsv(const FeatureTable& table, bool include_split = true);
void WriteCsv(const FeatureTable& table, const std::filesystem::path& path,
              bool include_split = true);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace ntlwb::data

#endif  // NTLWB_DATA_CSV_H_
