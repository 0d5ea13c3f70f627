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

#ifndef NTLWB_LOOP_ACTION_H_
#define NTLWB_LOOP_ACTION_H_

#include <optional>
#include <string>
#include <string_view>

namespace ntlwb::loop {

enum class ActionKind { kCapLabel, kDropFeature, kRestoreFeature, kUndo };

// cap_label, drop_feature, restore_feature, undo
std::string_view ActionKindName(ActionKind kind);
std::optional<ActionKind> ParseActionKind(std::string_view name);

// A stakeholder edit. `target` is a customer id for caps and a feature name
// for drops and restores; `value` is the capped label in kWh.
struct RefinementAction {
  ActionKind kind = ActionKind::kUndo;
  std::string target;
  double value = 0;

  static RefinementAction CapLabel(std::string customer_id, double kwh);
  static RefinementAction DropFeature(std::string feature);
  static RefinementAction RestoreFeature(std::string feature);
  static RefinementAction Undo();

  // One-line form, e.g. "cap_label C000042 66000".
  std::string Describe() const;

  friend bool operator==(const RefinementAction&, const RefinementAction&) = default;
};

}  // namespace ntlwb::loop

#endif  // NTLWB_LOOP_ACTION_H_
