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

#include "ntlwb/cli/cli.h"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ntlwb/cli/script.h"
#include "ntlwb/data/csv.h"
#include "ntlwb/data/synth.h"
#include "ntlwb/gbdt/model_io.h"
#include "ntlwb/gbdt/trainer.h"
#include "ntlwb/loop/json.h"
#include "ntlwb/service/service.h"
#include "ntlwb/util/text.h"

namespace ntlwb::cli {
namespace {

std::string Fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
  return buffer;
}

std::string JoinActions(const std::vector<loop::RefinementAction>& actions) {
  std::string out;
  for (const auto& a : actions) {
    if (!out.empty()) out += "; ";
    out += a.Describe();
  }
  return out;
}

std::string IterationLine(const loop::IterationRecord& r) {
  std::ostringstream line;
  line << "iteration " << r.index << "  " << metrics::GuardVerdictName(r.verdict)
       << "  ndcg=" << Fixed(r.metrics.ndcg_validation, 4) << "  energy@" << r.metrics.k << "="
       << Fixed(r.metrics.energy_at_k_test, 1) << "  rmse=" << Fixed(r.metrics.rmse_train, 1)
       << "  max|phi|=" << Fixed(r.metrics.max_abs_phi, 1);
  if (!r.actions.empty()) line << "  after: " << JoinActions(r.actions);
  return line.str();
}

loop::LoopConfig ReadConfig(const std::string& path) {
  if (path.empty()) return {};
  loop::Json json;
  try {
    json = loop::Json::parse(data::ReadFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, "config " + path + " is not valid JSON");
  }
  return loop::LoopConfigFromJson(json);
}

struct GenArgs {
  std::size_t customers = 20000;
  double ntl_rate = 0.034;
  bool outlier = false;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> split_seed;
  std::string output;
};

int Gen(const GenArgs& args, std::ostream& out) {
  data::SynthConfig cfg;
  cfg.n_customers = args.customers;
  cfg.ntl_rate = args.ntl_rate;
  cfg.plant_outlier = args.outlier;
  cfg.seed = args.seed;
  data::SplitSpec split;
  split.seed = args.split_seed.value_or(args.seed);
  const auto generated = data::GenerateSplitSynthetic(cfg, split);
  data::WriteCsv(generated.table, args.output, true);
  const std::string manifest = args.output + ".manifest";
  data::WriteFile(manifest, generated.manifest.Format());
  out << "wrote " << generated.table.num_rows() << " customers ("
      << generated.table.count_ntl() << " NTL) to " << args.output << "\n"
      << "manifest " << manifest << ": max label " << generated.manifest.at("max_label_kwh")
      << " kWh, outlier " << generated.manifest.at("outlier_customer") << "\n";
  return kExitOk;
}

struct RunArgs {
  std::string data;
  std::string script;
  std::string out;
  std::string config;
  bool deterministic = false;
  bool refit_final = false;
};

int Run(const RunArgs& args, std::ostream& out) {
  const auto steps = ParseScript(data::ReadFile(args.script));
  const auto config = ReadConfig(args.config);
  auto table = std::make_shared<const data::FeatureTable>(data::LoadCsv(args.data));
  const std::filesystem::path dir(args.out);
  loop::JournalOptions options;
  options.deterministic = args.deterministic;
  options.dataset_ref = std::filesystem::absolute(args.data).string();
  auto session = loop::JournaledSession::Start(dir / "journal.jsonl", table, config, options);

  out << IterationLine(session.RunIteration()) << "\n";
  for (const auto& step : steps) {
    try {
      session.Apply(ResolveStep(step.action, session.state()));
    } catch (const Error& e) {
      throw Error(e.code(), "script line " + std::to_string(step.line) + ": " + e.what());
    }
    out << IterationLine(session.RunIteration()) << "\n";
  }

  const auto& state = session.state();
  data::WriteFile(dir / "metrics.csv", FormatMetricsCsv(state));
  data::WriteFile(dir / "report.txt", FormatReport(state, (dir / "journal.jsonl").string()));
  if (args.refit_final) {
    auto rows = table->rows_in(data::Partition::kTrain);
    const auto validation = table->rows_in(data::Partition::kValidation);
    rows.insert(rows.end(), validation.begin(), validation.end());
    std::sort(rows.begin(), rows.end());
    const auto training = table->with_labels(state.effective_labels())
                              .select_rows(rows)
                              .select_columns(state.active_features());
    gbdt::SaveModel(gbdt::Fit(training, config.train), dir / "final.model");
    out << "refitted on train+validation: " << (dir / "final.model").string() << "\n";
  }
  const auto accepted = std::count_if(state.iterations().begin(), state.iterations().end(),
                                      [](const auto& r) { return r.accepted(); });
  out << accepted << " of " << state.iterations().size() << " iterations accepted; journal "
      << (dir / "journal.jsonl").string() << "\n";
  return kExitOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "ntlwb-data";
  std::string cors_origin = "*";
  bool deterministic = false;
  bool no_restore = false;
};

int Serve(const ServeArgs& args, std::ostream& out) {
  service::ServiceOptions options;
  options.data_dir = args.data_dir;
  options.cors_origin = args.cors_origin;
  options.deterministic = args.deterministic;
  options.restore_sessions = !args.no_restore;
  service::Service server(options);
  out << "serving " << server.session_count() << " restored session(s) on http://" << args.host
      << ":" << args.port << " (data dir " << args.data_dir << ", no authentication)"
      << std::endl;
  if (!server.Listen(args.host, args.port)) {
    throw Error(ErrorCode::kIo, "cannot listen on " + args.host + ":" + std::to_string(args.port));
  }
  return kExitOk;
}

struct ReportArgs {
  std::string journal;
  std::string out;
  std::string data;
};

int Report(const ReportArgs& args, std::ostream& out) {
  std::shared_ptr<const data::FeatureTable> table;
  if (!args.data.empty()) {
    table = std::make_shared<const data::FeatureTable>(data::LoadCsv(args.data));
  }
  loop::JournalOptions options;
  const auto session = loop::JournaledSession::Load(args.journal, options, table);
  const auto files = WriteReport(session.state(), args.journal, args.out);
  out << data::ReadFile(files.text);
  return kExitOk;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTrainingFailure:
    case ErrorCode::kCorruptModel:
      return kExitInternalError;
    default:
      return kExitUserError;
  }
}

}  // namespace

std::string FormatMetricsCsv(const loop::SessionState& state) {
  std::string out =
      "iteration,verdict,compared_to,ndcg_validation,ndcg_drop,energy_at_k_test,k,rmse_train,"
      "max_abs_phi,active_features,overrides,actions\n";
  for (const auto& r : state.iterations()) {
    out += std::to_string(r.index) + "," + std::string(metrics::GuardVerdictName(r.verdict)) + "," +
           (r.compared_to ? std::to_string(*r.compared_to) : "") + "," +
           FormatDouble(r.metrics.ndcg_validation) + "," + FormatDouble(r.ndcg_drop) + "," +
           FormatDouble(r.metrics.energy_at_k_test) + "," + std::to_string(r.metrics.k) + "," +
           FormatDouble(r.metrics.rmse_train) + "," + FormatDouble(r.metrics.max_abs_phi) + "," +
           std::to_string(r.inputs.active_features.size()) + "," +
           std::to_string(r.inputs.label_overrides.size()) + "," + JoinActions(r.actions) + "\n";
  }
  return out;
}

std::string FormatReport(const loop::SessionState& state, const std::string& journal) {
  std::ostringstream out;
  const auto& table = state.dataset();
  out << "NTL workbench report\n"
      << "journal:  " << journal << "\n"
      << "dataset:  " << table.provenance() << " (" << table.num_rows() << " customers, "
      << table.count_ntl() << " NTL)\n"
      << "guard:    reject when validation NDCG drops by >= " << FormatDouble(metrics::kGuardMaxDrop)
      << " versus the last accepted iteration\n\n";

  out << std::left << std::setw(5) << "iter" << std::setw(8) << "verdict" << std::right
      << std::setw(10) << "ndcg_val" << std::setw(16) << "energy@k_test" << std::setw(12)
      << "rmse_train" << std::setw(12) << "max|phi|" << "  actions\n";
  for (const auto& r : state.iterations()) {
    out << std::left << std::setw(5) << r.index << std::setw(8)
        << metrics::GuardVerdictName(r.verdict) << std::right << std::setw(10)
        << Fixed(r.metrics.ndcg_validation, 4) << std::setw(16)
        << Fixed(r.metrics.energy_at_k_test, 1) << std::setw(12) << Fixed(r.metrics.rmse_train, 1)
        << std::setw(12) << Fixed(r.metrics.max_abs_phi, 1) << "  "
        << (r.actions.empty() ? "-" : JoinActions(r.actions)) << (r.reverted() ? " (reverted)" : "")
        << "\n";
  }
  if (!state.iterations().empty()) {
    const auto& first = state.iterations().front().metrics;
    const auto& last = state.iterations()[state.cursor().value_or(0)].metrics;
    out << "\nenergy@" << last.k << " kWh, baseline -> current model: "
        << Fixed(first.energy_at_k_test, 1) << " -> " << Fixed(last.energy_at_k_test, 1) << "\n";
  }

  for (const auto& r : state.iterations()) {
    const auto& s = *r.global_summary;
    double total = 0;
    for (const double v : s.importance) total += v;
    out << "\niteration " << r.index << " importance (mean |phi| kWh, share)\n";
    for (const auto f : s.feature_order) {
      out << "  " << std::left << std::setw(26) << s.feature_names[f] << std::right
          << std::setw(12) << Fixed(s.importance[f], 2) << std::setw(9)
          << Fixed(total > 0 ? 100.0 * s.importance[f] / total : 0.0, 2) << "%\n";
    }
    out << "iteration " << r.index << " advisor findings\n";
    if (r.findings.empty()) out << "  none\n";
    for (const auto& o : r.findings.outliers) {
      out << "  outlier " << o.customer_id << " label " << FormatDouble(o.label) << " kWh";
      if (o.ratio_to_second_max) out << ", " << Fixed(*o.ratio_to_second_max, 2) << "x second max";
      if (o.robust_z) out << ", robust z " << Fixed(*o.robust_z, 2);
      out << "\n";
    }
    for (const auto& l : r.findings.low_importance) {
      out << "  low importance " << l.feature << " share " << Fixed(100.0 * l.share, 3) << "%\n";
    }
    for (const auto& c : r.findings.correlated_pairs) {
      out << "  correlated " << c.feature_a << " ~ " << c.feature_b << " r=" << Fixed(c.pearson, 3)
          << " phi rho=" << Fixed(c.phi_spearman, 3) << "\n";
    }
  }
  return out.str();
}

ReportFiles WriteReport(const loop::SessionState& state, const std::string& journal,
                        const std::filesystem::path& out_dir) {
  ReportFiles files{out_dir / "report.txt", out_dir / "metrics.csv", out_dir / "importance.csv"};
  data::WriteFile(files.text, FormatReport(state, journal));
  data::WriteFile(files.metrics, FormatMetricsCsv(state));
  std::string importance = "iteration,feature,mean_abs_phi\n";
  for (const auto& r : state.iterations()) {
    const auto& s = *r.global_summary;
    for (const auto f : s.feature_order) {
      importance += std::to_string(r.index) + "," + s.feature_names[f] + "," +
                    FormatDouble(s.importance[f]) + "\n";
    }
    char name[48];
    std::snprintf(name, sizeof name, "shap_topk_%04zu.csv", r.index);
    data::WriteFile(out_dir / name, shap::FormatSummaryCsv(*r.top_k_summary));
  }
  data::WriteFile(files.importance, importance);
  return files;
}

int Main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"NTL workbench: synthetic data, scripted refinement loops, HTTP API, reports",
               "ntlwb"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a labelled synthetic corpus with a split");
  gen_cmd->add_option("--customers", gen.customers, "Number of customers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--ntl-rate", gen.ntl_rate, "Fraction of NTL customers")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  gen_cmd->add_flag("--outlier", gen.outlier, "Plant one 260,000 kWh label outlier");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--split-seed", gen.split_seed, "Split seed (defaults to --seed)");
  gen_cmd->add_option("-o,--output", gen.output, "CSV path; the manifest goes to <path>.manifest")
      ->required();

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Replay a refinement script and journal the session");
  run_cmd->add_option("--data", run.data, "Split CSV dataset")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--script", run.script, "Action script")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--config", run.config, "Loop configuration JSON")->check(CLI::ExistingFile);
  run_cmd->add_flag("--deterministic", run.deterministic, "Fixed journal timestamps");
  run_cmd->add_flag("--refit-final", run.refit_final,
                    "Also fit the final state on train+validation to final.model");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
  serve_cmd->add_option("--host", serve.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "Port")
      ->envname("NTLWB_PORT")
      ->check(CLI::Range(1, 65535))
      ->capture_default_str();
  serve_cmd->add_option("--data-dir", serve.data_dir, "Datasets and session journals")
      ->envname("NTLWB_DATA_DIR")
      ->capture_default_str();
  serve_cmd->add_option("--cors-origin", serve.cors_origin, "Allowed browser origin")
      ->capture_default_str();
  serve_cmd->add_flag("--deterministic", serve.deterministic, "Fixed journal timestamps");
  serve_cmd->add_flag("--no-restore", serve.no_restore, "Do not replay existing journals");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Write a text report and CSVs from a journal");
  report_cmd->add_option("--journal", report.journal, "Session journal")
      ->required()
      ->check(CLI::ExistingFile);
  report_cmd->add_option("--out", report.out, "Output directory")->required();
  report_cmd->add_option("--data", report.data, "Dataset, if not at the recorded path")
      ->check(CLI::ExistingFile);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUserError;
  }

  try {
    if (gen_cmd->parsed()) return Gen(gen, out);
    if (run_cmd->parsed()) return Run(run, out);
    if (serve_cmd->parsed()) return Serve(serve, out);
    if (report_cmd->parsed()) return Report(report, out);
  } catch (const Error& e) {
    err << "error (" << ErrorCodeName(e.code()) << "): " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error (io): " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
  return kExitUserError;
}

}  // namespace ntlwb::cli
