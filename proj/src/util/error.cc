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

#include "ntlwb/util/error.h"

namespace ntlwb {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kMalformedCsv: return "malformed_csv";
    case ErrorCode::kNonNumericCell: return "non_numeric_cell";
    case ErrorCode::kNegativeLabel: return "negative_label";
    case ErrorCode::kEmptyStratum: return "empty_stratum";
    case ErrorCode::kMissingColumn: return "missing_column";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kCorruptModel: return "corrupt_model";
    case ErrorCode::kTooManyFeatures: return "too_many_features";
    case ErrorCode::kEmptyList: return "empty_list";
    case ErrorCode::kUnsplitDataset: return "unsplit_dataset";
    case ErrorCode::kUnknownFeature: return "unknown_feature";
    case ErrorCode::kUnknownCustomer: return "unknown_customer";
    case ErrorCode::kInvalidCap: return "invalid_cap";
    case ErrorCode::kInvalidAction: return "invalid_action";
    case ErrorCode::kBadIndex: return "bad_index";
    case ErrorCode::kCorruptJournal: return "corrupt_journal";
    case ErrorCode::kTrainingFailure: return "training_failure";
    case ErrorCode::kScriptError: return "script_error";
  }
  return "unknown";
}

}  // namespace ntlwb
