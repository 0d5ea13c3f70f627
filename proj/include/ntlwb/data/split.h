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

#ifndef NTLWB_DATA_SPLIT_H_
#define NTLWB_DATA_SPLIT_H_

#include <array>
#include <cstdint>

#include "ntlwb/data/feature_table.h"

namespace ntlwb::data {

struct SplitSpec {
  // train, validation, test
  std::array<double, 3> fractions{0.8, 0.1, 0.1};
  bool stratify_on_ntl = true;
  std::uint64_t seed = 7;

  void Validate() const;
};

// Per-stratum partition sizes for `count` rows by largest remainder; ties go
// to the earlier partition.
std::array<std::size_t, 3> AllocateLargestRemainder(std::size_t count,
                                                    const std::array<double, 3>& fractions);

// Re-tags every row. Rows are shuffled by a seeded permutation inside each
// stratum (NTL first, then non-NTL); row order and timestamps play no role.
FeatureTable StratifiedSplit(const FeatureTable& table, const SplitSpec& spec);

// Moves `row` into `target` by swapping tags with the lowest-index row of the
// same stratum already in `target`. Partition sizes per stratum are unchanged.
FeatureTable PinToPartition(const FeatureTable& table, std::size_t row, Partition target);

}  // namespace ntlwb::data

#endif  // NTLWB_DATA_SPLIT_H_
