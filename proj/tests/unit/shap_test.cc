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
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "ntlwb/data/split.h"
#include "ntlwb/data/synth.h"
#include "ntlwb/gbdt/trainer.h"
#include "ntlwb/shap/explain.h"
#include "ntlwb/shap/summary.h"
#include "ntlwb/util/error.h"
#include "../support/random_models.h"

namespace ntlwb::shap {
namespace {

using data::Cell;
using data::kMissing;
using gbdt::MissingGoes;
using gbdt::RegressionTree;
using gbdt::TreeNode;

TreeNode Split(std::int32_t feature, double threshold, MissingGoes missing, std::int64_t cover,
               std::int32_t left, std::int32_t right) {
  TreeNode n;
  n.feature = feature;
  n.threshold = threshold;
  n.missing_goes = missing;
  n.cover = cover;
  n.left = left;
  n.right = right;
  return n;
}

TreeNode Leaf(double value, std::int64_t cover) {
  TreeNode n;
  n.value = value;
  n.cover = cover;
  return n;
}

RegressionTree Stump(double left_value, std::int64_t left_cover, double right_value,
                     std::int64_t right_cover) {
  return RegressionTree({Split(0, 0.5, MissingGoes::kRight, left_cover + right_cover, 1, 2),
                         Leaf(left_value, left_cover), Leaf(right_value, right_cover)});
}

// Two trees over three features; expected attributions were enumerated over
// all orderings with exact rational arithmetic.
gbdt::BoostedEnsemble HandBuilt() {
  gbdt::BoostedEnsemble model;
  model.feature_names = {"f0", "f1", "f2"};
  model.base_score = 10;
  model.learning_rate = 0.5;
  model.trees.push_back(RegressionTree({
      Split(0, 0.5, MissingGoes::kRight, 100, 1, 4),
      Split(1, 2.0, MissingGoes::kRight, 60, 2, 3),
      Leaf(1, 20),
      Leaf(4, 40),
      Split(2, 10.0, MissingGoes::kLeft, 40, 5, 6),
      Leaf(7, 30),
      Leaf(-3, 10),
  }));
  model.trees.push_back(RegressionTree({Split(1, 1.0, MissingGoes::kRight, 100, 1, 2),
                                        Leaf(2, 25), Leaf(-1, 75)}));
  return model;
}

void CheckClose(const std::vector<double>& actual, const std::vector<double>& expected,
                double tol) {
  REQUIRE(actual.size() == expected.size());
  for (std::size_t i = 0; i < actual.size(); ++i) {
    CHECK(std::abs(actual[i] - expected[i]) <= tol * (1.0 + std::abs(expected[i])));
  }
}

TEST_CASE("conditional expectation examples") {
  const std::vector<Cell> x{1.0};
  CHECK(ConditionalExpectation(Stump(0, 50, 10, 50), x, {true}) == 10.0);
  CHECK(ConditionalExpectation(Stump(0, 50, 10, 50), x, {false}) == 5.0);
  CHECK(ConditionalExpectation(Stump(0, 75, 10, 25), x, {false}) == 2.5);
}

TEST_CASE("brute force matches exact enumeration on a hand-built ensemble") {
  const auto model = HandBuilt();
  struct Case {
    std::vector<Cell> x;
    std::vector<double> phi;
    double prediction;
  };
  const std::vector<Case> cases = {
      {{0.2, 3.0, kMissing}, {-0.45, 0.025, 0.25}, 11.5},
      {{0.9, 0.5, kMissing}, {1.125, 0.825, 0.875}, 14.5},
      {{kMissing, 1.5, 12.0}, {-0.375, -0.675, -2.625}, 8.0},
  };
  for (const auto& c : cases) {
    const auto brute = BruteForceShap(model, c.x);
    CHECK(brute.base_value == doctest::Approx(11.675).epsilon(1e-14));
    CheckClose(brute.phi, c.phi, 1e-12);
    const auto fast = TreeShap(model, c.x);
    CHECK(fast.base_value == doctest::Approx(11.675).epsilon(1e-14));
    CheckClose(fast.phi, c.phi, 1e-12);
    CHECK(model.Predict(c.x) == c.prediction);
  }
}

TEST_CASE("single-feature stump: phi is prediction minus expectation") {
  gbdt::BoostedEnsemble model;
  model.feature_names = {"x"};
  model.trees.push_back(Stump(0, 50, 10, 50));
  const std::vector<Cell> x{1.0};
  const auto report = BruteForceShap(model, x);
  CHECK(report.base_value == 5.0);
  CHECK(report.phi == std::vector<double>{5.0});
  CHECK(TreeShap(model, x).phi == std::vector<double>{5.0});
}

TEST_CASE("dummy feature gets zero attribution") {
  auto model = HandBuilt();
  model.feature_names.push_back("unused");
  const std::vector<Cell> x{0.9, 0.5, 3.0, 123.0};
  CHECK(BruteForceShap(model, x).phi[3] == 0.0);
  CHECK(TreeShap(model, x).phi[3] == 0.0);
}

TEST_CASE("constant model explains nothing") {
  gbdt::BoostedEnsemble model;
  model.feature_names = {"a", "b"};
  model.base_score = 7;
  model.trees.push_back(RegressionTree::Leaf(0.0, 30));
  const std::vector<Cell> x{1.0, kMissing};
  const auto report = TreeShap(model, x);
  CHECK(report.base_value == 7.0);
  CHECK(report.phi == std::vector<double>{0.0, 0.0});
}

TEST_CASE("mirrored duplicate features share credit") {
  // Root on a, children both split on b with identical leaves, and the mirror
  // tree with a and b exchanged.
  const auto tree_for = [](std::int32_t first, std::int32_t second) {
    return RegressionTree({
        Split(first, 0.5, MissingGoes::kLeft, 100, 1, 4),
        Split(second, 0.5, MissingGoes::kLeft, 50, 2, 3),
        Leaf(0, 25),
        Leaf(8, 25),
        Split(second, 0.5, MissingGoes::kLeft, 50, 5, 6),
        Leaf(8, 25),
        Leaf(20, 25),
    });
  };
  gbdt::BoostedEnsemble model;
  model.feature_names = {"a", "b"};
  model.trees.push_back(tree_for(0, 1));
  model.trees.push_back(tree_for(1, 0));
  for (const double v : {0.0, 1.0}) {
    const std::vector<Cell> x{v, v};
    const auto report = TreeShap(model, x);
    CHECK(report.phi[0] == doctest::Approx(report.phi[1]).epsilon(1e-14));
    const auto brute = BruteForceShap(model, x);
    CHECK(brute.phi[0] == doctest::Approx(brute.phi[1]).epsilon(1e-14));
  }
}

TEST_CASE("too many features for enumeration") {
  gbdt::BoostedEnsemble model;
  for (int f = 0; f < 21; ++f) model.feature_names.push_back("f" + std::to_string(f));
  model.trees.push_back(RegressionTree::Leaf(0, 10));
  const std::vector<Cell> x(21, 0.0);
  try {
    BruteForceShap(model, x);
    FAIL("expected TooManyFeatures");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTooManyFeatures);
  }
  CHECK_NOTHROW(TreeShap(model, x));
}

TEST_CASE("tree shap equals the enumeration oracle on random ensembles") {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t p = 1 + gen() % 8;
    const auto model = testing::RandomEnsemble(gen, p, 8, 4);
    const auto x = testing::RandomRow(gen, p);
    const auto brute = BruteForceShap(model, x);
    const auto fast = TreeShap(model, x);
    CHECK(fast.base_value == doctest::Approx(brute.base_value).epsilon(1e-12));
    CheckClose(fast.phi, brute.phi, 1e-9);

    const double total = std::accumulate(fast.phi.begin(), fast.phi.end(), fast.base_value);
    CHECK(std::abs(total - model.Predict(x)) <= 1e-6);

    // Attribution is additive over trees.
    std::vector<double> per_tree(p, 0.0);
    for (const auto& tree : model.trees) {
      gbdt::BoostedEnsemble single;
      single.feature_names = model.feature_names;
      single.learning_rate = model.learning_rate;
      single.trees = {tree};
      const auto report = TreeShap(single, x);
      for (std::size_t f = 0; f < p; ++f) per_tree[f] += report.phi[f];
    }
    CheckClose(fast.phi, per_tree, 1e-12);
  }
}

data::FeatureTable SmallCorpus(bool outlier) {
  data::SynthConfig cfg;
  cfg.n_customers = 2500;
  cfg.plant_outlier = outlier;
  cfg.seed = 21;
  return data::StratifiedSplit(data::GenerateSynthetic(cfg).table, {});
}

TEST_CASE("summaries aggregate tree shap") {
  const auto table = SmallCorpus(false);
  const auto train = table.select_rows(table.rows_in(data::Partition::kTrain));
  gbdt::TrainConfig cfg;
  cfg.n_trees = 30;
  const auto model = gbdt::Fit(train, cfg);
  const auto test = table.select_rows(table.rows_in(data::Partition::kTest));
  const auto summary = Summarize(model, test);

  REQUIRE(summary.num_rows() == test.num_rows());
  CHECK(summary.points().size() == test.num_rows() * model.feature_names.size());

  // importance_f = mean_r |phi_rf|, so sum_f importance_f = mean_r sum_f |phi_rf|.
  double per_row_total = 0;
  for (std::size_t r = 0; r < summary.num_rows(); ++r) {
    for (std::size_t f = 0; f < summary.num_features(); ++f) {
      per_row_total += std::abs(summary.phi_at(r, f));
    }
    const double total = std::accumulate(summary.phi.begin() + r * summary.num_features(),
                                         summary.phi.begin() + (r + 1) * summary.num_features(),
                                         summary.base_value);
    CHECK(std::abs(total - summary.predictions[r]) <= 1e-6);
  }
  const double importance_total =
      std::accumulate(summary.importance.begin(), summary.importance.end(), 0.0);
  CHECK(importance_total ==
        doctest::Approx(per_row_total / static_cast<double>(summary.num_rows())).epsilon(1e-12));
  for (std::size_t i = 1; i < summary.feature_order.size(); ++i) {
    CHECK(summary.importance[summary.feature_order[i - 1]] >=
          summary.importance[summary.feature_order[i]]);
  }

  // Normalized values span [0, 1] per feature, MISSING stays unset.
  for (const auto& point : summary.points()) {
    CHECK(point.raw.has_value() == point.normalized.has_value());
    if (point.normalized) {
      CHECK(*point.normalized >= 0.0);
      CHECK(*point.normalized <= 1.0);
    }
  }
}

TEST_CASE("top scored summary selection") {
  const auto table = SmallCorpus(false);
  const auto train = table.select_rows(table.rows_in(data::Partition::kTrain));
  gbdt::TrainConfig cfg;
  cfg.n_trees = 20;
  const auto model = gbdt::Fit(train, cfg);
  const auto test = table.select_rows(table.rows_in(data::Partition::kTest));

  const auto all = TopScoredSummary(model, test, test.num_rows());
  const auto plain = Summarize(model, test);
  auto sorted_refs = [](std::vector<std::string> refs) {
    std::sort(refs.begin(), refs.end());
    return refs;
  };
  CHECK(sorted_refs(all.row_refs) == sorted_refs(plain.row_refs));
  for (std::size_t f = 0; f < plain.num_features(); ++f) {
    CHECK(all.importance[f] == doctest::Approx(plain.importance[f]).epsilon(1e-12));
  }

  const auto one = TopScoredSummary(model, test, 1);
  CHECK(one.num_rows() == 1);

  // Independent selection: sort (score desc, id asc) pairs.
  const auto scores = gbdt::Predict(model, test);
  std::vector<std::pair<double, std::string>> pairs;
  for (std::size_t r = 0; r < test.num_rows(); ++r) pairs.emplace_back(-scores[r], test.customer_ids()[r]);
  std::sort(pairs.begin(), pairs.end());
  const std::size_t k = std::min<std::size_t>(200, test.num_rows());
  const auto top = TopScoredSummary(model, test, k);
  for (std::size_t i = 0; i < k; ++i) CHECK(top.row_refs[i] == pairs[i].second);
  CHECK(one.row_refs[0] == pairs[0].second);
}

TEST_CASE("identical rows give one beeswarm point per feature") {
  std::vector<std::string> ids;
  for (int i = 0; i < 5; ++i) ids.push_back("c" + std::to_string(i));
  data::FeatureTable rows(ids, {{"x", std::vector<Cell>(5, 1.0)}}, std::vector<double>(5, 0.0),
                          std::vector<data::Partition>(5), "");
  gbdt::BoostedEnsemble model;
  model.feature_names = {"x"};
  model.trees.push_back(Stump(0, 50, 10, 50));
  const auto summary = Summarize(model, rows);
  for (const auto& point : summary.points()) {
    CHECK(point.phi == 5.0);
    CHECK(point.normalized == 0.5);
  }
}

TEST_CASE("capping the planted outlier shrinks the largest attribution") {
  data::SynthConfig synth;
  synth.n_customers = 2500;
  synth.plant_outlier = true;
  synth.seed = 21;
  const auto generated = data::GenerateSynthetic(synth);
  const auto row = *generated.table.row_of(generated.manifest.at("outlier_customer"));
  const auto table = data::PinToPartition(data::StratifiedSplit(generated.table, {}), row,
                                          data::Partition::kTrain);
  const auto train_rows = table.rows_in(data::Partition::kTrain);
  gbdt::TrainConfig cfg;
  cfg.n_trees = 60;
  auto fit_max = [&](const std::vector<double>& labels) {
    const auto train = table.with_labels(labels).select_rows(train_rows);
    return Summarize(gbdt::Fit(train, cfg), train).max_abs_phi();
  };
  auto capped = table.labels();
  capped[row] = 66000;
  const double before = fit_max(table.labels());
  const double after = fit_max(capped);
  CHECK(after < before);
  CHECK(before / after > 2.0);
}

TEST_CASE("summary exports") {
  gbdt::BoostedEnsemble model;
  model.feature_names = {"x"};
  model.trees.push_back(Stump(0, 50, 10, 50));
  data::FeatureTable rows({"a", "b"}, {{"x", {1.0, kMissing}}}, {0, 0},
                          std::vector<data::Partition>(2), "");
  const auto summary = Summarize(model, rows);
  CHECK(FormatSummaryCsv(summary) ==
        "feature,row_ref,phi,raw_value,normalized_value\nx,a,5,1,0.5\nx,b,5,,\n");
  CHECK(FormatImportanceCsv(summary) == "feature,mean_abs_phi\nx,5\n");
}

}  // namespace
}  // namespace ntlwb::shap
