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

#ifndef NTLWB_UTIL_ERROR_H_
#define NTLWB_UTIL_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ntlwb {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kMalformedCsv,
  kNonNumericCell,
  kNegativeLabel,
  kEmptyStratum,
  kMissingColumn,
  kVersionMismatch,
  kCorruptModel,
  kTooManyFeatures,
  kEmptyList,
  kUnsplitDataset,
  kUnknownFeature,
  kUnknownCustomer,
  kInvalidCap,
  kInvalidAction,
  kBadIndex,
  kCorruptJournal,
  kTrainingFailure,
  kScriptError,
};

// Stable snake_case name used in wire payloads and CLI messages.
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ntlwb

#endif  // NTLWB_UTIL_ERROR_H_
