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

#ifndef NTLWB_GBDT_MODEL_IO_H_
#define NTLWB_GBDT_MODEL_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "ntlwb/gbdt/ensemble.h"

namespace ntlwb::gbdt {

inline constexpr int kModelFormatVersion = 1;

// Line-oriented text envelope:
//   ntlwb-model <version>
//   config <n_trees> <max_depth> <learning_rate> <min_child_cover> <seed>
//   base_score <x> / learning_rate <x>
//   features <p> followed by p lines "feature <name>"
//   trees <T>, then per tree "tree <node count>" and its nodes in preorder:
//     leaf <value> <cover>
//     split <feature> <threshold> <L|R> <value> <cover>
//   end
// Doubles use the shortest round-trip form, so load(save(m)) == m bit for bit.
std::string SerializeModel(const BoostedEnsemble& model);
BoostedEnsemble DeserializeModel(std::string_view text);

void SaveModel(const BoostedEnsemble& model, const std::filesystem::path& path);
BoostedEnsemble LoadModel(const std::filesystem::path& path);

}  // namespace ntlwb::gbdt

#endif  // NTLWB_GBDT_MODEL_IO_H_
