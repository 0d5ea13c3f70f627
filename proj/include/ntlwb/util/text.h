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

#ifndef NTLWB_UTIL_TEXT_H_
#define NTLWB_UTIL_TEXT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ntlwb {

// Shortest decimal representation that parses back to the same double.
std::string FormatDouble(double value);

// Strict full-string parse; leading/trailing blanks are trimmed first.
std::optional<double> ParseDouble(std::string_view text);
std::optional<std::int64_t> ParseInt(std::string_view text);

std::string_view Trim(std::string_view text);
std::vector<std::string_view> SplitFields(std::string_view line, char sep);

// 64-bit FNV-1a, rendered as 16 hex characters.
std::uint64_t Fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string HexDigest(std::uint64_t value);

}  // namespace ntlwb

#endif  // NTLWB_UTIL_TEXT_H_
