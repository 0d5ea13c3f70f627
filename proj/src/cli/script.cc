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

#include "ntlwb/cli/script.h"

#include <sstream>

#include "ntlwb/util/error.h"
#include "ntlwb/util/text.h"

namespace ntlwb::cli {
namespace {

[[noreturn]] void Fail(std::size_t line, const std::string& message) {
  throw Error(ErrorCode::kScriptError, "script line " + std::to_string(line) + ": " + message);
}

}  // namespace

std::vector<ScriptStep> ParseScript(std::string_view text) {
  std::vector<ScriptStep> steps;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '-') line = Trim(line.substr(1));

    std::vector<std::string> words;
    std::istringstream fields{std::string(line)};
    for (std::string w; fields >> w;) words.push_back(w);
    if (words.empty()) Fail(line_no, "empty step");

    const auto kind = loop::ParseActionKind(words[0]);
    if (!kind) Fail(line_no, "unknown action '" + words[0] + "'");
    auto expect = [&](std::size_t n, const char* usage) {
      if (words.size() != n) Fail(line_no, std::string("expected '") + usage + "'");
    };
    switch (*kind) {
      case loop::ActionKind::kCapLabel: {
        expect(3, "cap_label <customer id | @top> <kWh>");
        const auto kwh = ParseDouble(words[2]);
        if (!kwh) Fail(line_no, "'" + words[2] + "' is not a number");
        steps.push_back({line_no, loop::RefinementAction::CapLabel(words[1], *kwh)});
        break;
      }
      case loop::ActionKind::kDropFeature:
        expect(2, "drop_feature <name>");
        steps.push_back({line_no, loop::RefinementAction::DropFeature(words[1])});
        break;
      case loop::ActionKind::kRestoreFeature:
        expect(2, "restore_feature <name>");
        steps.push_back({line_no, loop::RefinementAction::RestoreFeature(words[1])});
        break;
      case loop::ActionKind::kUndo:
        expect(1, "undo");
        steps.push_back({line_no, loop::RefinementAction::Undo()});
        break;
    }
  }
  return steps;
}

loop::RefinementAction ResolveStep(const loop::RefinementAction& action,
                                   const loop::SessionState& state) {
  if (action.kind != loop::ActionKind::kCapLabel || action.target != kTopLabelRef) return action;
  const auto& table = state.dataset();
  const auto rows = table.rows_in(data::Partition::kTrain);
  std::size_t best = rows.front();
  for (const auto r : rows) {
    if (state.effective_label(r) > state.effective_label(best)) best = r;
  }
  return loop::RefinementAction::CapLabel(table.customer_ids()[best], action.value);
}

}  // namespace ntlwb::cli
