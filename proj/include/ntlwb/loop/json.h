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

#ifndef NTLWB_LOOP_JSON_H_
#define NTLWB_LOOP_JSON_H_

#include <optional>
#include <string_view>

#include "json.hpp"
#include "ntlwb/loop/session.h"

namespace ntlwb::loop {

using Json = nlohmann::ordered_json;

// Version of every payload and journal record.
inline constexpr int kWireVersion = 1;

Json ToJson(const RefinementAction& action);
// Throws kInvalidAction naming the offending field.
RefinementAction ActionFromJson(const Json& json);

Json ToJson(const gbdt::TrainConfig& config);
Json ToJson(const LoopConfig& config);
// Missing keys keep their defaults; throws kInvalidArgument on bad values.
LoopConfig LoopConfigFromJson(const Json& json);

Json ToJson(const IterationMetrics& metrics);
Json ToJson(const EditableState& state);
// Findings as one list, outliers first, then low importance, then pairs.
Json ToJson(const AdvisorFindings& findings);
// Everything but the summaries.
Json ToJson(const IterationRecord& record);
Json ToJson(const Comparison& comparison);

// Beeswarm payload. `limit` keeps the first rows of the summary.
Json SummaryToJson(const shap::GlobalShapSummary& summary, std::string_view scope,
                   std::optional<std::size_t> limit = std::nullopt);

// Session snapshot: editable state, cursor, pending actions, undo depth.
Json SnapshotToJson(const SessionState& state);

}  // namespace ntlwb::loop

#endif  // NTLWB_LOOP_JSON_H_
