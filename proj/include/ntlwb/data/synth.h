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

#ifndef NTLWB_DATA_SYNTH_H_
#define NTLWB_DATA_SYNTH_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ntlwb/data/feature_table.h"
#include "ntlwb/data/split.h"

namespace ntlwb::data {

// Customer-profiling catalog: visit history, last-occurrence recency,
// regional fraud density, threats, energy cut and consumption behaviour.
const std::vector<std::string>& DefaultFeatureCatalog();

struct SynthConfig {
  std::size_t n_customers = 20000;
  double ntl_rate = 0.034;
  bool plant_outlier = false;
  double outlier_kwh = 260000.0;
  double runner_up_kwh = 50000.0;
  double baseline_annual_kwh = 3500.0;
  std::uint64_t seed = 1;
  std::vector<std::string> feature_catalog = DefaultFeatureCatalog();

  void Validate() const;
};

// Bookkeeping of what the generator planted, written next to the CSV.
struct SynthManifest {
  std::map<std::string, std::string> entries;

  std::string Format() const;
  static SynthManifest Parse(const std::string& text);
  const std::string& at(const std::string& key) const;
};

struct SynthOutput {
  FeatureTable table;  // every row tagged train; split separately
  SynthManifest manifest;
};

// Planted phenomena:
//  * NTL probability and recovered kWh grow with CurrentReadingAbsences,
//    #FraudZone1Year and the recency of LastFraud;
//  * #FraudZone = #FraudZone1Year + older zone history (strongly correlated);
//  * #Threats / LastThreat are independent of the label;
//  * customers never visited have every Last* feature MISSING;
//  * with plant_outlier, one NTL row recovers outlier_kwh and the largest
//    remaining label is exactly runner_up_kwh.
SynthOutput GenerateSynthetic(const SynthConfig& cfg);

// Generates, splits with `split`, and keeps a planted outlier in train.
SynthOutput GenerateSplitSynthetic(const SynthConfig& cfg, const SplitSpec& split);

}  // namespace ntlwb::data

#endif  // NTLWB_DATA_SYNTH_H_
