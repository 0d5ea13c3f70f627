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

#ifndef NTLWB_CLI_CLI_H_
#define NTLWB_CLI_CLI_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ntlwb/loop/journal.h"

namespace ntlwb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitInternalError = 2;

// Entry point of the ntlwb tool; args[0] is the program name.
int Main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Report files written by `report`.
struct ReportFiles {
  std::filesystem::path text;        // report.txt
  std::filesystem::path metrics;     // metrics.csv
  std::filesystem::path importance;  // importance.csv
};

// Metric table in CSV form, one row per iteration.
std::string FormatMetricsCsv(const loop::SessionState& state);
std::string FormatReport(const loop::SessionState& state, const std::string& journal);
ReportFiles WriteReport(const loop::SessionState& state, const std::string& journal,
                        const std::filesystem::path& out_dir);

}  // namespace ntlwb::cli

#endif  // NTLWB_CLI_CLI_H_
