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

#include "ntlwb/data/split.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "ntlwb/util/error.h"
#include "ntlwb/util/random.h"

namespace ntlwb::data {

void SplitSpec::Validate() const {
  double sum = 0;
  for (const double f : fractions) {
    if (!(f > 0.0 && f < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "split fractions must each lie strictly between 0 and 1");
    }
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split fractions must sum to 1");
  }
}

std::array<std::size_t, 3> AllocateLargestRemainder(
    std::size_t count, const std::array<double, 3>& fractions) {
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    const double quota = static_cast<double>(count) * fractions[p];
    sizes[p] = static_cast<std::size_t>(std::floor(quota));
    remainders[p] = quota - std::floor(quota);
    assigned += sizes[p];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainders[a] > remainders[b];
  });
  for (std::size_t k = 0; assigned < count; k = (k + 1) % 3, ++assigned) {
    ++sizes[order[k]];
  }
  return sizes;
}

FeatureTable StratifiedSplit(const FeatureTable& table, const SplitSpec& spec) {
  spec.Validate();
  if (table.num_rows() < 10) {
    throw Error(ErrorCode::kInvalidArgument, "stratified split needs at least 10 rows");
  }

  std::vector<std::vector<std::size_t>> strata;
  if (spec.stratify_on_ntl) {
    std::vector<std::size_t> ntl, clean;
    for (std::size_t row = 0; row < table.num_rows(); ++row) {
      (table.is_ntl(row) ? ntl : clean).push_back(row);
    }
    if (ntl.empty() || clean.empty()) {
      throw Error(ErrorCode::kEmptyStratum,
                  "stratification needs both NTL and non-NTL rows");
    }
    strata.push_back(std::move(ntl));
    strata.push_back(std::move(clean));
  } else {
    strata.emplace_back(table.num_rows());
    std::iota(strata[0].begin(), strata[0].end(), 0);
  }

  constexpr std::array<Partition, 3> kOrder{Partition::kTrain, Partition::kValidation,
                                            Partition::kTest};
  Rng rng(spec.seed);
  std::vector<Partition> tags(table.num_rows(), Partition::kTrain);
  for (auto& stratum : strata) {
    const auto sizes = AllocateLargestRemainder(stratum.size(), spec.fractions);
    for (std::size_t p = 0; p < 3; ++p) {
      if (sizes[p] == 0) {
        throw Error(ErrorCode::kEmptyStratum,
                    "a stratum of " + std::to_string(stratum.size()) +
                        " rows cannot populate the " +
                        std::string(PartitionName(kOrder[p])) + " partition");
      }
    }
    rng.shuffle(std::span<std::size_t>(stratum));
    std::size_t cursor = 0;
    for (std::size_t p = 0; p < 3; ++p) {
      for (std::size_t i = 0; i < sizes[p]; ++i) tags[stratum[cursor++]] = kOrder[p];
    }
  }
  return table.with_split(std::move(tags));
}

FeatureTable PinToPartition(const FeatureTable& table, std::size_t row, Partition target) {
  if (row >= table.num_rows()) {
    throw Error(ErrorCode::kBadIndex, "row " + std::to_string(row) + " out of range");
  }
  std::vector<Partition> tags = table.split();
  if (tags[row] == target) return table;
  for (std::size_t other = 0; other < tags.size(); ++other) {
    if (tags[other] == target && table.is_ntl(other) == table.is_ntl(row)) {
      std::swap(tags[row], tags[other]);
      return table.with_split(std::move(tags));
    }
  }
  throw Error(ErrorCode::kEmptyStratum, "no row of the same stratum in the " +
                                            std::string(PartitionName(target)) + " partition");
}

}  // namespace ntlwb::data
