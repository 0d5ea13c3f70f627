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

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ntlwb/cli/cli.h"
#include "ntlwb/cli/script.h"
#include "ntlwb/data/csv.h"
#include "ntlwb/data/synth.h"
#include "ntlwb/loop/journal.h"
#include "ntlwb/util/error.h"
#include "../support/loop_fixtures.h"

namespace ntlwb::cli {
namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ntlwb");
  std::ostringstream out, err;
  const int code = Main(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kConfig = R"({"train":{"n_trees":12,"max_depth":3,"min_child_cover":10},)"
                      R"("energy_k":40,"top_k":25})";

struct Workspace {
  std::filesystem::path dir;
  std::string csv, config, script;
};

Workspace MakeWorkspace(const std::string& name) {
  Workspace w{testing::FreshDir(name), "", "", ""};
  w.csv = (w.dir / "corpus.csv").string();
  w.config = (w.dir / "config.json").string();
  w.script = (w.dir / "script.txt").string();
  data::WriteFile(w.config, kConfig);
  data::WriteFile(w.script,
                  "# two edits\n- cap_label @top 66000\n\n- drop_feature #Threats\n- undo\n");
  const auto gen = Invoke({"gen", "--customers", "1500", "--outlier", "--seed", "3", "-o", w.csv});
  REQUIRE(gen.code == kExitOk);
  return w;
}

TEST_CASE("script parsing") {
  const auto steps = ParseScript(
      "# comment\n- cap_label C000001 500\n\ndrop_feature #Threats\n- restore_feature "
      "#Threats\n- undo\n");
  REQUIRE(steps.size() == 4);
  CHECK(steps[0].line == 2);
  CHECK(steps[0].action.kind == loop::ActionKind::kCapLabel);
  CHECK(steps[0].action.target == "C000001");
  CHECK(steps[0].action.value == 500.0);
  CHECK(steps[1].line == 4);
  CHECK(steps[1].action.kind == loop::ActionKind::kDropFeature);
  CHECK(steps[2].action.kind == loop::ActionKind::kRestoreFeature);
  CHECK(steps[3].action.kind == loop::ActionKind::kUndo);

  for (const char* bad : {"- frob x", "- cap_label C1", "- cap_label C1 lots", "- undo now",
                          "- drop_feature"}) {
    CAPTURE(bad);
    const std::string text = std::string("# header\n") + bad + "\n";
    try {
      ParseScript(text);
      FAIL("expected a script error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kScriptError);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
}

TEST_CASE("@top resolves to the largest effective training label") {
  const auto corpus = testing::MakePlantedCorpus(1500, 3);
  loop::SessionState state(corpus.table, testing::FastLoopConfig());
  const auto resolved = ResolveStep(loop::RefinementAction::CapLabel(std::string(kTopLabelRef), 1000), state);
  CHECK(resolved.target == corpus.outlier_id);
  state.Apply(resolved);
  const auto next = ResolveStep(loop::RefinementAction::CapLabel(std::string(kTopLabelRef), 1000), state);
  CHECK(next.target != corpus.outlier_id);
  const auto plain = loop::RefinementAction::DropFeature("#Threats");
  CHECK(ResolveStep(plain, state) == plain);
}

TEST_CASE("gen writes a split corpus and manifest") {
  const auto w = MakeWorkspace("cli-gen");
  const auto table = data::LoadCsv(w.csv);
  CHECK(table.num_rows() == 1500);
  CHECK_FALSE(table.rows_in(data::Partition::kTest).empty());
  const auto manifest = data::ReadFile(w.csv + ".manifest");
  CHECK(manifest.find("max_label_kwh") != std::string::npos);
  CHECK(manifest.find("260000") != std::string::npos);
}

TEST_CASE("run is deterministic and report reproduces it") {
  const auto w = MakeWorkspace("cli-run");
  const auto a = (w.dir / "a").string();
  const auto b = (w.dir / "b").string();
  const auto run_a = Invoke({"run", "--data", w.csv, "--script", w.script, "--out", a, "--config",
                             w.config, "--deterministic", "--refit-final"});
  REQUIRE_MESSAGE(run_a.code == kExitOk, run_a.err);
  CHECK(run_a.out.find("iteration 3") != std::string::npos);
  const auto run_b = Invoke({"run", "--data", w.csv, "--script", w.script, "--out", b, "--config",
                             w.config, "--deterministic"});
  REQUIRE(run_b.code == kExitOk);
  CHECK(data::ReadFile(a + "/journal.jsonl") == data::ReadFile(b + "/journal.jsonl"));
  CHECK(std::filesystem::exists(a + "/final.model"));
  CHECK(std::filesystem::exists(a + "/models/iteration-0003.model"));

  const auto metrics = data::ReadFile(a + "/metrics.csv");
  CHECK(metrics.starts_with("iteration,verdict,"));
  CHECK(metrics.find("cap_label") != std::string::npos);

  const auto rep = (w.dir / "rep").string();
  const auto report = Invoke({"report", "--journal", a + "/journal.jsonl", "--out", rep});
  REQUIRE_MESSAGE(report.code == kExitOk, report.err);
  CHECK(report.out.find("NTL workbench report") != std::string::npos);
  CHECK(report.out.find("outlier") != std::string::npos);
  CHECK(data::ReadFile(rep + "/metrics.csv") == metrics);
  for (int n = 0; n < 4; ++n) {
    CHECK(std::filesystem::exists(rep + "/shap_topk_000" + std::to_string(n) + ".csv"));
  }
  CHECK(std::filesystem::exists(rep + "/importance.csv"));
}

TEST_CASE("exit codes") {
  const auto w = MakeWorkspace("cli-exit");
  CHECK(Invoke({}).code == kExitUserError);
  CHECK(Invoke({"bogus"}).code == kExitUserError);
  CHECK(Invoke({"--help"}).code == kExitOk);
  CHECK(Invoke({"gen", "--customers", "0", "-o", w.csv}).code == kExitUserError);

  data::WriteFile(w.script, "- cap_label @top 66000\n- drop_feature NoSuchFeature\n");
  const auto bad = Invoke({"run", "--data", w.csv, "--script", w.script, "--out",
                           (w.dir / "bad").string(), "--config", w.config});
  CHECK(bad.code == kExitUserError);
  CHECK(bad.err.find("unknown_feature") != std::string::npos);
  CHECK(bad.err.find("script line 2") != std::string::npos);

  data::WriteFile(w.dir / "broken.jsonl", "{not json\n");
  const auto corrupt =
      Invoke({"report", "--journal", (w.dir / "broken.jsonl").string(), "--out",
              (w.dir / "r").string()});
  CHECK(corrupt.code == kExitUserError);
  CHECK(corrupt.err.find("corrupt_journal") != std::string::npos);
}

}  // namespace
}  // namespace ntlwb::cli
