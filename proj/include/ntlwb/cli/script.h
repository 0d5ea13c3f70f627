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

#ifndef NTLWB_CLI_SCRIPT_H_
#define NTLWB_CLI_SCRIPT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ntlwb/loop/action.h"
#include "ntlwb/loop/session.h"

namespace ntlwb::cli {

// Stands for the customer with the largest effective training label.
inline constexpr std::string_view kTopLabelRef = "@top";

struct ScriptStep {
  std::size_t line = 0;
  loop::RefinementAction action;
};

// One action per line:
//   - cap_label <customer id | @top> <kWh>
//   - drop_feature <name>
//   - restore_feature <name>
//   - undo
// Blank lines and lines starting with '#' are skipped; the leading "- " is
// optional. Throws kScriptError with the line number.
std::vector<ScriptStep> ParseScript(std::string_view text);

// Replaces @top by a customer id.
loop::RefinementAction ResolveStep(const loop::RefinementAction& action,
                                   const loop::SessionState& state);

}  // namespace ntlwb::cli

#endif  // NTLWB_CLI_SCRIPT_H_
