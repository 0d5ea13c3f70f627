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

#include "ntlwb/data/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "ntlwb/util/error.h"
#include "ntlwb/util/random.h"
#include "ntlwb/util/text.h"

namespace ntlwb::data {
namespace {

// Logit coefficients of the planted NTL propensity.
constexpr double kAbsenceCoef = 0.40;
constexpr double kZoneCoef = 2.5;
constexpr double kRecencyCoef = 2.2;
constexpr double kEnergyCutCoef = 0.6;
constexpr double kHistoryMonths = 120.0;

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Customer {
  std::unordered_map<std::string, Cell> features;
  double propensity = 0;  // logit without intercept
  double magnitude_years = 0;
};

// Most recent (k = 0) or k-th most recent month of the given visit list.
Cell NthRecent(std::vector<double> months, std::size_t k) {
  if (months.size() <= k) return kMissing;
  std::sort(months.begin(), months.end());
  return months[k];
}

}  // namespace

const std::vector<std::string>& DefaultFeatureCatalog() {
  static const std::vector<std::string> kCatalog = {
      "#Visit",          "#Fraud",          "#Fraud1",
      "#Fraud2",         "#Correct",        "#Impossible",
      "LastVisit",       "LastFraud",       "LastFraud1",
      "LastFraud2",      "LastCorrect",     "LastImpossible",
      "LastImpossible2", "#FraudZone",      "#FraudZone1Year",
      "#FraudStreet",    "#FraudInBuilding", "#Threats",
      "LastThreat",      "EnergyCut",       "CurrentReadingAbsences",
      "ConsumptionDropRatio", "PeerConsumptionRatio"};
  return kCatalog;
}

void SynthConfig::Validate() const {
  if (n_customers < 10) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 10 customers");
  }
  if (!(ntl_rate > 0.0 && ntl_rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ntl_rate must lie in (0, 1)");
  }
  if (!(outlier_kwh > runner_up_kwh && runner_up_kwh > baseline_annual_kwh &&
        baseline_annual_kwh > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "need outlier_kwh > runner_up_kwh > baseline_annual_kwh > 0");
  }
  const auto& known = DefaultFeatureCatalog();
  for (const auto& name : feature_catalog) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw Error(ErrorCode::kUnknownFeature, "generator has no feature '" + name + "'");
    }
  }
}

std::string SynthManifest::Format() const {
  std::string out;
  for (const auto& [key, value] : entries) out += key + "=" + value + "\n";
  return out;
}

SynthManifest SynthManifest::Parse(const std::string& text) {
  SynthManifest manifest;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto trimmed = Trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument, "manifest line lacks '='");
    }
    manifest.entries[std::string(trimmed.substr(0, eq))] =
        std::string(trimmed.substr(eq + 1));
  }
  return manifest;
}

const std::string& SynthManifest::at(const std::string& key) const {
  const auto it = entries.find(key);
  if (it == entries.end()) {
    throw Error(ErrorCode::kInvalidArgument, "manifest has no key '" + key + "'");
  }
  return it->second;
}

SynthOutput GenerateSynthetic(const SynthConfig& cfg) {
  cfg.Validate();
  Rng rng(cfg.seed);
  const std::size_t n = cfg.n_customers;

  // Zone-level fraud history shared by all customers of a zone.
  const std::size_t n_zones = std::max<std::size_t>(10, n / 100);
  std::vector<double> zone_rate(n_zones), zone_1year(n_zones), zone_total(n_zones);
  for (std::size_t z = 0; z < n_zones; ++z) {
    const double intensity = std::exp(0.7 * rng.normal());
    zone_rate[z] = 25.0 * intensity;
    const auto recent = rng.poisson(zone_rate[z]);
    const auto older = rng.poisson(2.0 * zone_rate[z]);
    zone_1year[z] = static_cast<double>(recent);
    zone_total[z] = static_cast<double>(recent + older);
  }

  std::vector<Customer> customers(n);
  std::size_t never_read = 0;
  std::size_t never_visited = 0;
  for (auto& c : customers) {
    auto& f = c.features;
    const std::size_t zone = rng.below(n_zones);
    const double fraud_trait = rng.normal();

    // Inspection history.
    const auto visits = rng.poisson(0.9 + 0.4 * std::max(0.0, fraud_trait));
    std::vector<double> fraud_months, fraud1_months, fraud2_months, correct_months,
        impossible_months, visit_months;
    const double p_fraud = Sigmoid(-2.2 + 0.9 * fraud_trait);
    for (std::int64_t v = 0; v < visits; ++v) {
      const double month = static_cast<double>(1 + rng.below(static_cast<std::uint64_t>(kHistoryMonths)));
      visit_months.push_back(month);
      if (rng.bernoulli(p_fraud)) {
        fraud_months.push_back(month);
        const double kind = rng.uniform();
        if (kind < 0.5) {
          fraud1_months.push_back(month);
        } else if (kind < 0.8) {
          fraud2_months.push_back(month);
        }
      } else if (rng.bernoulli(0.18)) {
        impossible_months.push_back(month);
      } else {
        correct_months.push_back(month);
      }
    }
    if (visits == 0) ++never_visited;
    f["#Visit"] = static_cast<double>(visits);
    f["#Fraud"] = static_cast<double>(fraud_months.size());
    f["#Fraud1"] = static_cast<double>(fraud1_months.size());
    f["#Fraud2"] = static_cast<double>(fraud2_months.size());
    f["#Correct"] = static_cast<double>(correct_months.size());
    f["#Impossible"] = static_cast<double>(impossible_months.size());
    f["LastVisit"] = NthRecent(visit_months, 0);
    f["LastFraud"] = NthRecent(fraud_months, 0);
    f["LastFraud1"] = NthRecent(fraud1_months, 0);
    f["LastFraud2"] = NthRecent(fraud2_months, 0);
    f["LastCorrect"] = NthRecent(correct_months, 0);
    f["LastImpossible"] = NthRecent(impossible_months, 0);
    f["LastImpossible2"] = NthRecent(impossible_months, 1);

    // Region.
    const double zone_intensity = zone_rate[zone] / 25.0;
    f["#FraudZone"] = zone_total[zone];
    f["#FraudZone1Year"] = zone_1year[zone];
    f["#FraudStreet"] = static_cast<double>(rng.poisson(0.6 * (0.2 + zone_intensity)));
    f["#FraudInBuilding"] = static_cast<double>(rng.poisson(0.15 * (0.2 + zone_intensity)));

    // Threats carry no signal.
    const auto threats = rng.poisson(0.03);
    f["#Threats"] = static_cast<double>(threats);
    f["LastThreat"] = threats > 0
        ? Cell(static_cast<double>(1 + rng.below(static_cast<std::uint64_t>(kHistoryMonths))))
        : kMissing;

    const bool energy_cut = rng.bernoulli(0.04 + 0.03 * (fraud_trait > 1.0 ? 1.0 : 0.0));
    f["EnergyCut"] = energy_cut ? 1.0 : 0.0;

    // Metering.
    const bool read_ever = !rng.bernoulli(0.03);
    double absences = 0;
    if (read_ever) {
      absences = static_cast<double>(
          std::min<std::int64_t>(12, rng.poisson(0.8 + 0.9 * std::max(0.0, fraud_trait))));
      f["CurrentReadingAbsences"] = absences;
    } else {
      ++never_read;
      f["CurrentReadingAbsences"] = kMissing;
    }
    f["PeerConsumptionRatio"] = std::exp(0.35 * rng.normal());

    const double recency = f["LastFraud"] ? std::exp(-*f["LastFraud"] / 36.0) : 0.0;
    c.propensity = kAbsenceCoef * absences + kZoneCoef * 0.5 *
                       (std::log((zone_1year[zone] + 1.0) / 25.0) +
                        std::log((zone_total[zone] + 1.0) / 75.0)) +
                   kRecencyCoef * recency + kEnergyCutCoef * (energy_cut ? 1.0 : 0.0);
    c.magnitude_years = 0.3 + 0.12 * absences + 0.6 * recency + 0.004 * zone_1year[zone];
    // Consumption drop needs the NTL draw; filled in below.
    f["ConsumptionDropRatio"] = read_ever ? Cell(0.0) : kMissing;
  }

  // Intercept such that the mean NTL probability equals ntl_rate.
  double lo = -40.0, hi = 40.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    double mean = 0;
    for (const auto& c : customers) mean += Sigmoid(mid + c.propensity);
    mean /= static_cast<double>(n);
    (mean < cfg.ntl_rate ? lo : hi) = mid;
  }
  const double intercept = 0.5 * (lo + hi);

  std::vector<double> labels(n, 0.0);
  std::vector<std::size_t> ntl_rows;
  for (std::size_t i = 0; i < n; ++i) {
    auto& c = customers[i];
    const bool ntl = rng.bernoulli(Sigmoid(intercept + c.propensity));
    if (ntl) {
      const double consumption = std::exp(0.4 * rng.normal());
      const double years = c.magnitude_years * std::exp(0.35 * rng.normal());
      labels[i] = std::clamp(std::round(cfg.baseline_annual_kwh * years * consumption),
                             100.0, 0.6 * cfg.runner_up_kwh);
      ntl_rows.push_back(i);
    }
    if (c.features["ConsumptionDropRatio"]) {
      const double drop = ntl ? rng.uniform(0.55, 0.95) : 1.0;
      c.features["ConsumptionDropRatio"] = drop * std::exp(0.25 * rng.normal());
    }
  }

  std::string outlier_id = "none";
  if (!ntl_rows.empty()) {
    std::size_t top = ntl_rows.front();
    for (const std::size_t row : ntl_rows) {
      if (labels[row] > labels[top]) top = row;
    }
    if (cfg.plant_outlier && ntl_rows.size() >= 2) {
      std::size_t outlier = ntl_rows[rng.below(ntl_rows.size())];
      if (outlier == top) {
        outlier = ntl_rows[(std::find(ntl_rows.begin(), ntl_rows.end(), top) -
                            ntl_rows.begin() + 1) % ntl_rows.size()];
      }
      labels[top] = cfg.runner_up_kwh;
      labels[outlier] = cfg.outlier_kwh;
      // An unusual inspection record: a second impossible visit long ago.
      auto& f = customers[outlier].features;
      f["#Impossible"] = std::max(2.0, f["#Impossible"].value_or(0.0));
      f["#Visit"] = std::max(*f["#Visit"], *f["#Impossible"] + *f["#Fraud"] + *f["#Correct"]);
      f["LastImpossible"] = f["LastImpossible"].value_or(60.0);
      f["LastImpossible2"] = std::max(*f["LastImpossible"] + 1.0, 110.0);
      f["LastVisit"] = std::min(f["LastVisit"].value_or(*f["LastImpossible"]),
                                *f["LastImpossible"]);
      outlier_id = std::to_string(outlier);
    } else {
      labels[top] = cfg.runner_up_kwh;
    }
  }

  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "C%06zu", i);
    ids[i] = buffer;
  }
  std::vector<FeatureColumn> columns;
  for (const auto& name : cfg.feature_catalog) {
    FeatureColumn column{name, {}};
    column.values.reserve(n);
    for (auto& c : customers) column.values.push_back(c.features.at(name));
    columns.push_back(std::move(column));
  }

  SynthManifest manifest;
  auto& m = manifest.entries;
  m["seed"] = std::to_string(cfg.seed);
  m["n_customers"] = std::to_string(n);
  m["ntl_rate"] = FormatDouble(cfg.ntl_rate);
  m["plant_outlier"] = cfg.plant_outlier ? "true" : "false";
  m["outlier_kwh"] = FormatDouble(cfg.outlier_kwh);
  m["runner_up_kwh"] = FormatDouble(cfg.runner_up_kwh);
  m["baseline_annual_kwh"] = FormatDouble(cfg.baseline_annual_kwh);
  m["coef.absences"] = FormatDouble(kAbsenceCoef);
  m["coef.fraud_zone_1year"] = FormatDouble(kZoneCoef);
  m["coef.last_fraud_recency"] = FormatDouble(kRecencyCoef);
  m["coef.energy_cut"] = FormatDouble(kEnergyCutCoef);
  m["intercept"] = FormatDouble(intercept);
  m["ntl_count"] = std::to_string(ntl_rows.size());
  m["never_read_count"] = std::to_string(never_read);
  m["never_visited_count"] = std::to_string(never_visited);
  m["outlier_customer"] = outlier_id == "none" ? "none" : ids[std::stoul(outlier_id)];
  std::vector<double> sorted = labels;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  m["max_label_kwh"] = FormatDouble(sorted.empty() ? 0.0 : sorted[0]);
  m["second_max_label_kwh"] = FormatDouble(sorted.size() < 2 ? 0.0 : sorted[1]);

  const std::string provenance = "synthetic:seed=" + std::to_string(cfg.seed) +
                                 ",n=" + std::to_string(n) +
                                 ",rate=" + FormatDouble(cfg.ntl_rate) +
                                 ",outlier=" + (cfg.plant_outlier ? "1" : "0");
  m["provenance"] = provenance;
  FeatureTable table(std::move(ids), std::move(columns), std::move(labels),
                     std::vector<Partition>(n, Partition::kTrain), provenance);
  return {std::move(table), std::move(manifest)};
}

SynthOutput GenerateSplitSynthetic(const SynthConfig& cfg, const SplitSpec& split) {
  auto out = GenerateSynthetic(cfg);
  out.table = StratifiedSplit(out.table, split);
  if (cfg.plant_outlier) {
    if (const auto row = out.table.row_of(out.manifest.at("outlier_customer"))) {
      out.table = PinToPartition(out.table, *row, Partition::kTrain);
    }
  }
  return out;
}

}  // namespace ntlwb::data
