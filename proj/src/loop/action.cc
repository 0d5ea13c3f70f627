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

#include "ntlwb/loop/action.h"

#include <utility>

#include "ntlwb/util/text.h"

namespace ntlwb::loop {

std::string_view ActionKindName(ActionKind kind) {
  switch (kind) {
    case ActionKind::kCapLabel:
      return "cap_label";
    case ActionKind::kDropFeature:
      return "drop_feature";
    case ActionKind::kRestoreFeature:
      return "restore_feature";
    case ActionKind::kUndo:
      return "undo";
  }
  return "unknown";
}

std::optional<ActionKind> ParseActionKind(std::string_view name) {
  for (const auto kind : {ActionKind::kCapLabel, ActionKind::kDropFeature,
                          ActionKind::kRestoreFeature, ActionKind::kUndo}) {
    if (ActionKindName(kind) == name) return kind;
  }
  return std::nullopt;
}

RefinementAction RefinementAction::CapLabel(std::string customer_id, double kwh) {
  return {ActionKind::kCapLabel, std::move(customer_id), kwh};
}

RefinementAction RefinementAction::DropFeature(std::string feature) {
  return {ActionKind::kDropFeature, std::move(feature), 0};
}

RefinementAction RefinementAction::RestoreFeature(std::string feature) {
  return {ActionKind::kRestoreFeature, std::move(feature), 0};
}

RefinementAction RefinementAction::Undo() { return {}; }

std::string RefinementAction::Describe() const {
  std::string out(ActionKindName(kind));
  if (kind != ActionKind::kUndo) out += " " + target;
  if (kind == ActionKind::kCapLabel) out += " " + FormatDouble(value);
  return out;
}

}  // namespace ntlwb::loop
