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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "ntlwb/data/csv.h"
#include "ntlwb/gbdt/ensemble.h"
#include "ntlwb/loop/advisor.h"
#include "ntlwb/loop/journal.h"
#include "ntlwb/loop/json.h"
#include "ntlwb/loop/session.h"
#include "ntlwb/metrics/ranking.h"
#include "ntlwb/util/error.h"
#include "../support/loop_fixtures.h"

namespace ntlwb::loop {
namespace {

using data::Cell;
using data::Partition;

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

const testing::PlantedCorpus& Corpus() {
  static const auto corpus = testing::MakePlantedCorpus(1500, 3);
  return corpus;
}

std::shared_ptr<const data::FeatureTable> SignalTable() {
  // "signal" decides the label; "noise" does not.
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unit(0, 1);
  std::vector<std::string> ids;
  data::FeatureColumn signal{"signal", {}}, noise{"noise", {}};
  std::vector<double> labels;
  std::vector<Partition> split;
  for (std::size_t i = 0; i < 600; ++i) {
    const double s = unit(gen);
    ids.push_back("S" + std::to_string(i));
    signal.values.push_back(s);
    noise.values.push_back(unit(gen));
    labels.push_back(s > 0.8 ? std::round(1000 * s) : 0.0);
    split.push_back(i % 10 < 6 ? Partition::kTrain
                               : (i % 10 < 8 ? Partition::kValidation : Partition::kTest));
  }
  return std::make_shared<const data::FeatureTable>(ids, std::vector{signal, noise}, labels,
                                                    split, "signal-fixture");
}

shap::GlobalShapSummary HandSummary(std::vector<std::string> names, std::size_t rows,
                                    std::vector<double> phi, std::vector<Cell> raw) {
  shap::GlobalShapSummary s;
  s.feature_names = std::move(names);
  for (std::size_t r = 0; r < rows; ++r) s.row_refs.push_back("r" + std::to_string(r));
  s.predictions.assign(rows, 0.0);
  s.phi = std::move(phi);
  s.raw = std::move(raw);
  const std::size_t p = s.feature_names.size();
  s.importance.assign(p, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t f = 0; f < p; ++f) s.importance[f] += std::abs(s.phi[r * p + f]) / rows;
  }
  for (std::size_t f = 0; f < p; ++f) s.feature_order.push_back(f);
  return s;
}

data::FeatureTable LabelTable(const std::vector<double>& labels) {
  std::vector<std::string> ids;
  data::FeatureColumn x{"x", {}};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ids.push_back("L" + std::to_string(i));
    x.values.push_back(0.0);
  }
  return data::FeatureTable(ids, {x}, labels, std::vector<Partition>(labels.size()), "labels");
}

TEST_CASE("start session") {
  SessionState a(Corpus().table, testing::FastLoopConfig());
  CHECK(a.active_features() == data::DefaultFeatureCatalog());
  CHECK(a.active_features().size() == 23);
  CHECK(a.iterations().empty());
  CHECK(a.label_overrides().empty());
  CHECK_FALSE(a.cursor().has_value());

  SessionState b(Corpus().table, testing::FastLoopConfig());
  a.Apply(RefinementAction::DropFeature("#Threats"));
  CHECK(b.active_features().size() == 23);

  const auto& table = *Corpus().table;
  auto no_test = table.split();
  for (auto& p : no_test) {
    if (p == Partition::kTest) p = Partition::kTrain;
  }
  auto unsplit = std::make_shared<const data::FeatureTable>(table.with_split(no_test));
  CHECK(CodeOf([&] { SessionState s(unsplit, {}); }) == ErrorCode::kUnsplitDataset);
}

TEST_CASE("action validation leaves the state unchanged") {
  SessionState s(Corpus().table, testing::FastLoopConfig());
  const auto& table = s.dataset();
  std::size_t clean = 0;
  while (table.is_ntl(clean)) ++clean;
  const auto outlier = Corpus().outlier_id;
  const auto before = s.editable();

  CHECK(CodeOf([&] { s.Apply(RefinementAction::DropFeature("Nope")); }) ==
        ErrorCode::kUnknownFeature);
  CHECK(CodeOf([&] { s.Apply(RefinementAction::RestoreFeature("Nope")); }) ==
        ErrorCode::kUnknownFeature);
  CHECK(CodeOf([&] { s.Apply(RefinementAction::RestoreFeature("#Visit")); }) ==
        ErrorCode::kInvalidAction);
  CHECK(CodeOf([&] { s.Apply(RefinementAction::CapLabel("nobody", 10)); }) ==
        ErrorCode::kUnknownCustomer);
  CHECK(CodeOf([&] { s.Apply(RefinementAction::CapLabel(table.customer_ids()[clean], 10)); }) ==
        ErrorCode::kInvalidCap);
  CHECK(CodeOf([&] { s.Apply(RefinementAction::CapLabel(outlier, 260000)); }) ==
        ErrorCode::kInvalidCap);
  CHECK(CodeOf([&] { s.Apply(RefinementAction::CapLabel(outlier, 0)); }) ==
        ErrorCode::kInvalidCap);
  CHECK(CodeOf([&] { s.Apply(RefinementAction::CapLabel(outlier, NAN)); }) ==
        ErrorCode::kInvalidCap);
  CHECK(CodeOf([&] { s.Apply(RefinementAction::Undo()); }) == ErrorCode::kInvalidAction);
  CHECK(s.editable() == before);
  CHECK(s.pending_actions().empty());

  s.Apply(RefinementAction::CapLabel(outlier, 66000));
  CHECK(s.effective_label(*table.row_of(outlier)) == 66000);
  CHECK(table.labels()[*table.row_of(outlier)] == 260000);
  // A second cap must go below the current effective label.
  CHECK(CodeOf([&] { s.Apply(RefinementAction::CapLabel(outlier, 70000)); }) ==
        ErrorCode::kInvalidCap);
  s.Apply(RefinementAction::CapLabel(outlier, 60000));
  CHECK(s.label_overrides().at(outlier) == 60000);
}

TEST_CASE("drop, restore and undo") {
  SessionState s(Corpus().table, testing::FastLoopConfig());
  const auto original = s.editable();
  s.Apply(RefinementAction::DropFeature("#Threats"));
  CHECK(s.active_features().size() == 22);
  CHECK(CodeOf([&] { s.Apply(RefinementAction::DropFeature("#Threats")); }) ==
        ErrorCode::kInvalidAction);
  s.Apply(RefinementAction::DropFeature("#FraudZone"));
  s.Apply(RefinementAction::RestoreFeature("#FraudZone"));
  s.Apply(RefinementAction::RestoreFeature("#Threats"));
  CHECK(s.editable() == original);
  CHECK(s.pending_actions().size() == 4);

  s.Apply(RefinementAction::Undo());
  CHECK(std::find(s.active_features().begin(), s.active_features().end(), "#Threats") ==
        s.active_features().end());
  s.Apply(RefinementAction::Undo());
  s.Apply(RefinementAction::Undo());
  s.Apply(RefinementAction::Undo());
  CHECK(s.editable() == original);
  CHECK(s.undo_stack().empty());
}

TEST_CASE("undo is a left inverse of the last action") {
  std::mt19937_64 gen(17);
  SessionState s(Corpus().table, testing::FastLoopConfig());
  std::size_t applied = 0;
  for (int step = 0; step < 400; ++step) {
    const auto action = testing::RandomAction(gen, s);
    if (action.kind == ActionKind::kUndo) continue;
    const auto before = s.editable();
    try {
      s.Apply(action);
    } catch (const Error&) {
      CHECK(s.editable() == before);
      continue;
    }
    ++applied;
    if (gen() % 2 == 0) {
      s.Apply(RefinementAction::Undo());
      CHECK(s.editable() == before);
    }
  }
  CHECK(applied > 50);
}

TEST_CASE("the last active feature cannot be dropped") {
  SessionState s(SignalTable(), testing::FastLoopConfig());
  s.Apply(RefinementAction::DropFeature("noise"));
  CHECK(CodeOf([&] { s.Apply(RefinementAction::DropFeature("signal")); }) ==
        ErrorCode::kInvalidAction);
}

TEST_CASE("iterations evaluate on original labels") {
  SessionState s(Corpus().table, testing::FastLoopConfig());
  const auto& base = s.RunIteration();
  CHECK(base.index == 0);
  CHECK(base.accepted());
  CHECK_FALSE(base.compared_to.has_value());
  CHECK(s.cursor() == 0u);

  s.Apply(RefinementAction::CapLabel(Corpus().outlier_id, 66000));
  const auto& capped = s.RunIteration();
  CHECK(capped.actions.size() == 1);
  CHECK(capped.compared_to == 0u);
  CHECK(capped.inputs.label_overrides.at(Corpus().outlier_id) == 66000);

  const auto& table = s.dataset();
  const auto val = table.select_rows(table.rows_in(Partition::kValidation));
  const auto test = table.select_rows(table.rows_in(Partition::kTest));
  CHECK(capped.metrics.ndcg_validation ==
        *metrics::Ndcg(gbdt::Predict(*capped.model, val), val.labels()));
  CHECK(capped.metrics.k == 40);
  CHECK(capped.metrics.energy_at_k_test ==
        metrics::EnergyAtK(gbdt::Predict(*capped.model, test), test.labels(), 40));
  CHECK(capped.global_summary->num_rows() == table.rows_in(Partition::kTrain).size());
  CHECK(capped.top_k_summary->num_rows() == 25);
  CHECK(capped.metrics.max_abs_phi == capped.global_summary->max_abs_phi());
  CHECK(capped.ndcg_drop == base.metrics.ndcg_validation - capped.metrics.ndcg_validation);
}

TEST_CASE("guard rejection reverts the pending actions") {
  SessionState s(SignalTable(), testing::FastLoopConfig());
  const auto& base = s.RunIteration();
  CHECK(base.metrics.ndcg_validation > 0.9);

  s.Apply(RefinementAction::DropFeature("signal"));
  const auto& dropped = s.RunIteration();
  CHECK(dropped.ndcg_drop >= 0.1);
  CHECK(dropped.verdict == metrics::GuardVerdict::kReject);
  CHECK(dropped.reverted());
  CHECK(dropped.inputs.active_features == std::vector<std::string>{"noise"});
  CHECK(s.cursor() == 0u);
  CHECK(s.active_features() == std::vector<std::string>{"signal", "noise"});
  CHECK(s.undo_stack().empty());
  CHECK(s.pending_actions().empty());

  // The next iteration is again compared with iteration 0.
  const auto& again = s.RunIteration();
  CHECK(again.compared_to == 0u);
  CHECK(again.accepted());
  CHECK_FALSE(again.reverted());
  CHECK(s.cursor() == 2u);
}

TEST_CASE("rejection restores an undone action") {
  SessionState s(SignalTable(), testing::FastLoopConfig());
  s.Apply(RefinementAction::DropFeature("noise"));
  s.RunIteration();
  s.Apply(RefinementAction::Undo());
  s.Apply(RefinementAction::DropFeature("signal"));
  CHECK(s.RunIteration().reverted());
  CHECK(s.active_features() == std::vector<std::string>{"signal"});
  REQUIRE(s.undo_stack().size() == 1);
  CHECK(s.undo_stack()[0].action == RefinementAction::DropFeature("noise"));
}

TEST_CASE("advisor outliers") {
  AdvisorConfig config;
  const auto summary = HandSummary({"x"}, 1, {1.0}, {Cell(0.0)});
  std::vector<double> labels = {0, 1000, 1100, 1200, 1300, 1400, 900, 1000, 50000, 260000};
  auto findings = Advise(LabelTable(labels), summary, config);
  REQUIRE(findings.outliers.size() == 2);
  CHECK(findings.outliers[0].customer_id == "L9");
  CHECK(findings.outliers[0].ratio_to_second_max == doctest::Approx(5.2));
  CHECK(*findings.outliers[0].ratio_to_second_max == 5.2);
  // 50000 / 260000 is small, but on the log scale it is far from the bulk.
  CHECK(findings.outliers[1].customer_id == "L8");
  CHECK(*findings.outliers[1].robust_z > 5);

  // Ratio exactly 3 is flagged.
  findings = Advise(LabelTable({100, 100, 300}), summary, config);
  REQUIRE(findings.outliers.size() == 1);
  CHECK(findings.outliers[0].label == 300);
  CHECK_FALSE(findings.outliers[0].robust_z.has_value());

  findings = Advise(LabelTable({100, 100, 299}), summary, config);
  CHECK(findings.outliers.empty());
  findings = Advise(LabelTable({0, 0, 5000}), summary, config);
  CHECK(findings.outliers.empty());
}

TEST_CASE("advisor low importance and correlated pairs") {
  // a and b move together; c is unrelated; d barely matters.
  const std::size_t rows = 40;
  std::vector<double> phi;
  std::vector<Cell> raw;
  for (std::size_t r = 0; r < rows; ++r) {
    const double v = static_cast<double>(r);
    phi.insert(phi.end(), {v - 20, 0.5 * (v - 20) + ((r % 3) * 0.8), (r % 2 ? 6.0 : -6.0), 0.01});
    raw.insert(raw.end(), {Cell(v), Cell(2 * v + (r % 2)), Cell(static_cast<double>(r % 5)),
                           r == 3 ? Cell() : Cell(1.0 * (r % 7))});
  }
  const auto summary = HandSummary({"a", "b", "c", "d"}, rows, phi, raw);
  const auto findings = Advise(LabelTable({0, 10, 20}), summary);
  REQUIRE(findings.low_importance.size() == 1);
  CHECK(findings.low_importance[0].feature == "d");
  const double total = summary.importance[0] + summary.importance[1] + summary.importance[2] +
                       summary.importance[3];
  CHECK(findings.low_importance[0].share == summary.importance[3] / total);
  REQUIRE(findings.correlated_pairs.size() == 1);
  CHECK(findings.correlated_pairs[0].feature_a == "a");
  CHECK(findings.correlated_pairs[0].feature_b == "b");
  CHECK(findings.correlated_pairs[0].pearson > 0.9);
  CHECK(findings.correlated_pairs[0].phi_spearman > 0.8);

  AdvisorConfig strict;
  strict.correlated_phi_spearman = 0.99999;
  CHECK(Advise(LabelTable({0, 10, 20}), summary, strict).correlated_pairs.empty());
}

TEST_CASE("findings list outliers first") {
  AdvisorFindings f;
  f.low_importance.push_back({"#Threats", 0.001});
  f.correlated_pairs.push_back({"#FraudZone", "#FraudZone1Year", 0.98, 0.85});
  f.outliers.push_back({"C1", 260000, 5.2, 7.0});
  const auto json = ToJson(f);
  REQUIRE(json.size() == 3);
  CHECK(json[0]["kind"] == "outlier");
  CHECK(json[1]["kind"] == "low_importance");
  CHECK(json[2]["kind"] == "correlated_pair");
}

TEST_CASE("spearman and pearson helpers") {
  const std::vector<double> a = {1, 2, 2, 3}, b = {10, 20, 20, 40};
  CHECK(AverageRanks(a) == std::vector<double>{1, 2.5, 2.5, 4});
  CHECK(*Spearman(a, b) == doctest::Approx(1.0));
  CHECK_FALSE(Pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}).has_value());
  CHECK(*Pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) ==
        doctest::Approx(-1.0));
}

TEST_CASE("compare iterations") {
  SessionState s(Corpus().table, testing::FastLoopConfig());
  s.RunIteration();
  const auto same = s.Compare(0, 0);
  CHECK(same.ndcg_delta == 0);
  CHECK(same.energy_delta == 0);
  CHECK(same.rmse_delta == 0);
  CHECK(same.max_abs_phi_delta == 0);
  CHECK(same.features_removed.empty());
  CHECK(same.overrides.empty());
  for (const auto& d : same.importance) CHECK(d.delta == 0);

  s.Apply(RefinementAction::CapLabel(Corpus().outlier_id, 66000));
  s.Apply(RefinementAction::DropFeature("#Threats"));
  s.Apply(RefinementAction::DropFeature("#FraudZone"));
  s.RunIteration();
  const auto diff = s.Compare(0, 1);
  CHECK(diff.features_removed == std::vector<std::string>{"#FraudZone", "#Threats"});
  CHECK(diff.features_added.empty());
  REQUIRE(diff.overrides.size() == 1);
  CHECK(diff.overrides[0].customer_id == Corpus().outlier_id);
  CHECK_FALSE(diff.overrides[0].a.has_value());
  CHECK(diff.overrides[0].b == 66000.0);
  CHECK(diff.importance.size() == 23);
  const auto threats = std::find_if(diff.importance.begin(), diff.importance.end(),
                                    [](const auto& d) { return d.feature == "#Threats"; });
  CHECK_FALSE(threats->b.has_value());
  CHECK(diff.max_abs_phi_delta < 0);

  const auto back = s.Compare(1, 0);
  CHECK(back.features_added == diff.features_removed);
  CHECK(CodeOf([&] { s.Compare(0, 2); }) == ErrorCode::kBadIndex);
}

TEST_CASE("action and config json") {
  for (const auto& action :
       {RefinementAction::CapLabel("C1", 66000.5), RefinementAction::DropFeature("#Threats"),
        RefinementAction::RestoreFeature("#Threats"), RefinementAction::Undo()}) {
    CHECK(ActionFromJson(Json::parse(ToJson(action).dump())) == action);
  }
  CHECK(ToJson(RefinementAction::CapLabel("C1", 66000)).dump() ==
        R"({"kind":"cap_label","customer_id":"C1","kwh":66000.0})");
  for (const char* bad : {R"([])", R"({})", R"({"kind":"explode"})", R"({"kind":"cap_label"})",
                          R"({"kind":"cap_label","customer_id":"C1","kwh":"x"})",
                          R"({"kind":"drop_feature","feature":3})"}) {
    CHECK(CodeOf([&] { ActionFromJson(Json::parse(bad)); }) == ErrorCode::kInvalidAction);
  }
  auto config = testing::FastLoopConfig();
  config.advisor.outlier_ratio = 4;
  CHECK(LoopConfigFromJson(Json::parse(ToJson(config).dump())) == config);
  CHECK(LoopConfigFromJson(Json::object()) == LoopConfig{});
  CHECK(CodeOf([] { LoopConfigFromJson(Json::parse(R"({"energy_k":0})")); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { LoopConfigFromJson(Json::parse(R"({"train":{"n_trees":"many"}})")); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("journal replays to an equal session") {
  const auto dir = testing::FreshDir("loop-journal");
  const auto path = dir / "journal.jsonl";
  JournalOptions options;
  options.deterministic = true;
  auto live = JournaledSession::Start(path, Corpus().table, testing::FastLoopConfig(), options);
  live.RunIteration();
  live.Apply(RefinementAction::CapLabel(Corpus().outlier_id, 66000));
  live.Apply(RefinementAction::DropFeature("#Threats"));
  live.RunIteration();
  live.Apply(RefinementAction::Undo());
  CHECK(live.event_count() == 6);

  auto replayed = JournaledSession::Load(path, options, Corpus().table);
  CHECK(replayed.state() == live.state());
  CHECK(replayed.event_count() == 6);

  // Without saved models the iterations are refitted.
  std::filesystem::remove_all(dir / "models");
  CHECK(JournaledSession::Load(path, options, Corpus().table).state() == live.state());

  // Appending after a reload continues the same journal.
  replayed.RunIteration();
  auto twice = JournaledSession::Load(path, options, Corpus().table);
  CHECK(twice.state() == replayed.state());
  CHECK(twice.event_count() == 7);
}

TEST_CASE("journal records") {
  const auto dir = testing::FreshDir("loop-records");
  const auto path = dir / "journal.jsonl";
  JournalOptions options;
  options.deterministic = true;
  auto live = JournaledSession::Start(path, Corpus().table, testing::FastLoopConfig(), options);
  live.RunIteration();
  std::ifstream in(path);
  std::vector<Json> records;
  for (std::string line; std::getline(in, line);) records.push_back(Json::parse(line));
  REQUIRE(records.size() == 2);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i]["v"] == 1);
    CHECK(records[i]["seq"] == i);
    CHECK(records[i]["ts"] == "1970-01-01T00:00:00Z");
    CHECK(records[i]["digest"] == SessionDigest(*Corpus().table, testing::FastLoopConfig()));
  }
  CHECK(records[0]["type"] == "session_started");
  CHECK(records[0]["payload"]["features"].size() == 23);
  CHECK(records[1]["type"] == "iteration_completed");
  CHECK(records[1]["iteration"] == 0);
  CHECK(records[1]["payload"]["model_ref"] == "models/iteration-0000.model");
  CHECK(std::filesystem::exists(dir / "models/iteration-0000.model"));

  JournalOptions live_clock;
  auto timed = JournaledSession::Start(dir / "timed.jsonl", Corpus().table,
                                       testing::FastLoopConfig(), live_clock);
  std::ifstream timed_in(dir / "timed.jsonl");
  std::string line;
  std::getline(timed_in, line);
  CHECK(Json::parse(line)["ts"] != "1970-01-01T00:00:00Z");
}

TEST_CASE("corrupt journals name the line") {
  const auto dir = testing::FreshDir("loop-corrupt");
  const auto path = dir / "journal.jsonl";
  JournalOptions options;
  options.deterministic = true;
  options.save_models = false;
  {
    auto live = JournaledSession::Start(path, Corpus().table, testing::FastLoopConfig(), options);
    live.Apply(RefinementAction::DropFeature("#Threats"));
    live.Apply(RefinementAction::DropFeature("#Visit"));
  }
  std::vector<std::string> lines;
  {
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
  }
  REQUIRE(lines.size() == 3);
  auto write = [&](const std::vector<std::string>& content) {
    std::ofstream out(path, std::ios::trunc);
    for (const auto& l : content) out << l << '\n';
  };
  auto message = [&]() -> std::string {
    try {
      JournaledSession::Load(path, options, Corpus().table);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kCorruptJournal);
      return e.what();
    }
    FAIL("expected CorruptJournal");
    return "";
  };

  write({lines[0], lines[1], lines[2].substr(0, lines[2].size() / 2)});
  CHECK(message().find("line 3") != std::string::npos);

  write({lines[0], lines[2]});
  CHECK(message().find("line 2") != std::string::npos);

  auto wrong_digest = Json::parse(lines[1]);
  wrong_digest["digest"] = "0000000000000000";
  write({lines[0], wrong_digest.dump(), lines[2]});
  CHECK(message().find("line 2") != std::string::npos);

  // Replaying the same drop twice is not a valid history.
  write({lines[0], lines[1], lines[1]});
  CHECK(message().find("line 3") != std::string::npos);

  write({lines[1]});
  CHECK(message().find("line 1") != std::string::npos);

  // Another dataset cannot replay this journal.
  write(lines);
  const auto other = testing::MakePlantedCorpus(1500, 4).table;
  try {
    JournaledSession::Load(path, options, other);
    FAIL("expected CorruptJournal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCorruptJournal);
  }
}

TEST_CASE("empty journal gives a fresh session") {
  const auto dir = testing::FreshDir("loop-empty");
  const auto path = dir / "journal.jsonl";
  { std::ofstream touch(path); }
  auto session = JournaledSession::Load(path, {}, Corpus().table);
  CHECK(session.state().iterations().empty());
  CHECK(session.state().active_features().size() == 23);
  CHECK(session.event_count() == 1);
  CHECK(CodeOf([&] {
          std::ofstream reset(path, std::ios::trunc);
          reset.close();
          JournaledSession::Load(path);
        }) == ErrorCode::kCorruptJournal);
}

TEST_CASE("journal reloads its dataset from the recorded reference") {
  const auto dir = testing::FreshDir("loop-dataref");
  data::WriteCsv(*Corpus().table, dir / "data.csv", true);
  auto table = std::make_shared<const data::FeatureTable>(data::LoadCsv(dir / "data.csv"));
  JournalOptions options;
  options.deterministic = true;
  options.dataset_ref = (dir / "data.csv").string();
  auto live = JournaledSession::Start(dir / "journal.jsonl", table, testing::FastLoopConfig(),
                                      options);
  live.Apply(RefinementAction::DropFeature("#Threats"));
  live.RunIteration();
  const auto loaded = JournaledSession::Load(dir / "journal.jsonl");
  CHECK(loaded.state() == live.state());
}

TEST_CASE("random sequences replay from the journal") {
  const auto dir = testing::FreshDir("loop-random");
  std::mt19937_64 gen(99);
  const auto corpus = testing::MakePlantedCorpus(400, 8);
  auto config = testing::FastLoopConfig();
  config.train.n_trees = 4;
  JournalOptions options;
  options.deterministic = true;
  for (int trial = 0; trial < 10; ++trial) {
    const auto path = dir / ("journal-" + std::to_string(trial) + ".jsonl");
    options.save_models = trial % 2 == 0;
    auto live = JournaledSession::Start(path, corpus.table, config, options);
    for (int step = 0; step < 12; ++step) {
      if (gen() % 3 == 0) {
        live.RunIteration();
        continue;
      }
      try {
        live.Apply(testing::RandomAction(gen, live.state()));
      } catch (const Error&) {
      }
    }
    CHECK(JournaledSession::Load(path, options, corpus.table).state() == live.state());
  }
}

}  // namespace
}  // namespace ntlwb::loop
