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
#include <fstream>
#include <string>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "ntlwb/data/csv.h"
#include "ntlwb/service/service.h"
#include "../support/loop_fixtures.h"

namespace ntlwb::service {
namespace {

using Json = nlohmann::ordered_json;

class LiveServer {
 public:
  explicit LiveServer(const std::filesystem::path& data_dir) {
    ServiceOptions options;
    options.data_dir = data_dir;
    options.deterministic = true;
    service_ = std::make_unique<Service>(options);
    port_ = service_->BindToAnyPort("127.0.0.1");
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { service_->ListenAfterBind(); });
    service_->WaitUntilReady();
  }
  ~LiveServer() {
    service_->Stop();
    thread_.join();
  }
  Service& service() { return *service_; }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(120, 0);
    return c;
  }

 private:
  std::unique_ptr<Service> service_;
  int port_ = -1;
  std::thread thread_;
};

struct Reply {
  int status = 0;
  Json body;
  std::string raw;
};

Reply Send(httplib::Client& c, const std::string& method, const std::string& path,
           const Json& body = nullptr) {
  httplib::Result result = method == "GET"
                               ? c.Get(path)
                               : c.Post(path, body.is_null() ? "" : body.dump(), "application/json");
  REQUIRE(result);
  Reply r{result->status, Json(), result->body};
  if (!result->body.empty()) r.body = Json::parse(result->body);
  return r;
}

Json FastConfig() {
  return Json{{"train", {{"n_trees", 12}, {"max_depth", 3}, {"min_child_cover", 10}}},
              {"energy_k", 40},
              {"top_k", 25}};
}

Json SyntheticRequest() {
  return Json{{"synthetic", {{"customers", 1200}, {"outlier", true}, {"seed", 3}}},
              {"config", FastConfig()}};
}

void CheckEnvelope(const Reply& r, int status, const std::string& code) {
  CHECK(r.status == status);
  CHECK(r.body["v"] == 1);
  CHECK(r.body["error_code"] == code);
  CHECK(r.body["message"].is_string());
  CHECK(r.body["detail"].is_object());
}

TEST_CASE("session lifecycle over http") {
  const auto dir = testing::FreshDir("service-lifecycle");
  LiveServer server(dir);
  auto c = server.client();

  const auto created = Send(c, "POST", "/sessions", SyntheticRequest());
  REQUIRE(created.status == 201);
  const std::string id = created.body["session_id"];
  CHECK(created.body["v"] == 1);
  CHECK(created.body["snapshot"]["active_features"].size() == 23);
  CHECK(created.body["snapshot"]["cursor"].is_null());
  CHECK(server.service().session_count() == 1);

  const auto listed = Send(c, "GET", "/sessions");
  CHECK(listed.body["sessions"].size() == 1);
  CHECK(listed.body["sessions"][0]["session_id"] == id);

  const auto base = Send(c, "POST", "/sessions/" + id + "/iterations");
  REQUIRE(base.status == 201);
  CHECK(base.body["units"] == "kWh");
  CHECK(base.body["cursor"] == 0);
  const auto& findings = base.body["iteration"]["findings"];
  REQUIRE_FALSE(findings.empty());
  REQUIRE(findings[0]["kind"] == "outlier");
  const std::string outlier = findings[0]["customer_id"];
  CHECK(findings[0]["label"] == 260000.0);
  CHECK(findings[0]["ratio_to_second_max"] == 5.2);

  const auto action = Send(c, "POST", "/sessions/" + id + "/actions",
                           Json{{"kind", "cap_label"}, {"customer_id", outlier}, {"kwh", 66000}});
  REQUIRE(action.status == 200);
  CHECK(action.body["snapshot"]["label_overrides"][0]["kwh"] == 66000.0);
  CHECK(action.body["snapshot"]["pending_actions"].size() == 1);

  const auto second = Send(c, "POST", "/sessions/" + id + "/iterations");
  REQUIRE(second.status == 201);
  CHECK(second.body["iteration"]["guard"]["compared_to"] == 0);

  const auto history = Send(c, "GET", "/sessions/" + id + "/history");
  REQUIRE(history.status == 200);
  REQUIRE(history.body["iterations"].size() == 2);
  CHECK(history.body["iterations"][1]["guard"]["verdict"] == "accept");
  CHECK(history.body["iterations"][1]["actions"][0]["kind"] == "cap_label");
  CHECK(history.body["units"] == "kWh");

  // Idempotent reads.
  CHECK(Send(c, "GET", "/sessions/" + id + "/history").raw == history.raw);

  const auto one = Send(c, "GET", "/sessions/" + id + "/iterations/1");
  CHECK(one.body["iteration"] == history.body["iterations"][1]);

  const auto compare = Send(c, "GET", "/sessions/" + id + "/compare?a=0&b=1");
  REQUIRE(compare.status == 200);
  CHECK(compare.body["overrides"][0]["customer_id"] == outlier);
  CHECK(compare.body["deltas"]["max_abs_phi"].get<double>() < 0);
  CHECK(Send(c, "GET", "/sessions/" + id + "/compare?a=0&b=0").body["deltas"]["ndcg_validation"] ==
        0.0);

  // Every successful mutation left one journal record.
  std::ifstream journal(dir / "sessions" / id / "journal.jsonl");
  std::size_t lines = 0;
  for (std::string line; std::getline(journal, line);) ++lines;
  CHECK(lines == 4);
}

TEST_CASE("shap payloads") {
  const auto dir = testing::FreshDir("service-shap");
  LiveServer server(dir);
  auto c = server.client();
  const std::string id = Send(c, "POST", "/sessions", SyntheticRequest()).body["session_id"];
  Send(c, "POST", "/sessions/" + id + "/actions", Json{{"kind", "drop_feature"}, {"feature", "#Threats"}});
  REQUIRE(Send(c, "POST", "/sessions/" + id + "/iterations").status == 201);

  const auto topk = Send(c, "GET", "/sessions/" + id + "/iterations/0/shap?scope=topk&k=10");
  REQUIRE(topk.status == 200);
  CHECK(topk.body["units"] == "kWh");
  CHECK(topk.body["scope"] == "topk");
  CHECK(topk.body["rows"] == 10);
  CHECK(topk.body["feature_order"].size() == 22);
  CHECK(topk.body["points"].size() == 10 * 22);
  CHECK(topk.body["points"].size() <= 200 * 22);

  const auto all_topk = Send(c, "GET", "/sessions/" + id + "/iterations/0/shap?scope=topk&k=200");
  CHECK(all_topk.body["rows"] == 25);

  const auto global = Send(c, "GET", "/sessions/" + id + "/iterations/0/shap");
  REQUIRE(global.status == 200);
  CHECK(global.body["scope"] == "global");
  const std::size_t rows = global.body["rows"];
  CHECK(global.body["points"].size() == rows * 22);
  // Points follow the importance order.
  CHECK(global.body["points"][0]["feature"] == global.body["feature_order"][0]);
  bool saw_missing = false;
  for (const auto& point : global.body["points"]) {
    if (point["missing"] == true) {
      CHECK(point["raw"].is_null());
      CHECK(point["normalized"].is_null());
      saw_missing = true;
    } else {
      CHECK(point["normalized"].get<double>() >= 0.0);
      CHECK(point["normalized"].get<double>() <= 1.0);
    }
  }
  CHECK(saw_missing);

  CheckEnvelope(Send(c, "GET", "/sessions/" + id + "/iterations/0/shap?scope=local"), 422,
                "invalid_argument");
  CheckEnvelope(Send(c, "GET", "/sessions/" + id + "/iterations/0/shap?scope=topk&k=0"), 422,
                "invalid_argument");
  CheckEnvelope(Send(c, "GET", "/sessions/" + id + "/iterations/5/shap"), 404, "bad_index");
  CheckEnvelope(Send(c, "GET", "/sessions/" + id + "/iterations/x/shap"), 404, "bad_index");
}

TEST_CASE("error envelopes") {
  const auto dir = testing::FreshDir("service-errors");
  LiveServer server(dir);
  auto c = server.client();
  CheckEnvelope(Send(c, "GET", "/sessions/nope/history"), 404, "unknown_session");
  CheckEnvelope(Send(c, "POST", "/sessions/nope/iterations"), 404, "unknown_session");
  CheckEnvelope(Send(c, "GET", "/elsewhere"), 404, "not_found");

  const std::string id = Send(c, "POST", "/sessions", SyntheticRequest()).body["session_id"];
  const auto actions = "/sessions/" + id + "/actions";
  CheckEnvelope(Send(c, "POST", actions, Json{{"kind", "drop_feature"}, {"feature", "Nope"}}), 422,
                "unknown_feature");
  CheckEnvelope(Send(c, "POST", actions, Json{{"kind", "explode"}}), 422, "invalid_action");
  CheckEnvelope(Send(c, "POST", actions, Json{{"kind", "undo"}}), 422, "invalid_action");
  CheckEnvelope(Send(c, "POST", actions,
                     Json{{"kind", "cap_label"}, {"customer_id", "nobody"}, {"kwh", 5}}),
                422, "unknown_customer");
  const auto bad_json = c.Post(actions, "{not json", "application/json");
  REQUIRE(bad_json);
  CHECK(bad_json->status == 400);
  CHECK(Json::parse(bad_json->body)["error_code"] == "bad_request");

  CheckEnvelope(Send(c, "GET", "/sessions/" + id + "/compare?a=0"), 422, "invalid_argument");
  CheckEnvelope(Send(c, "GET", "/sessions/" + id + "/compare?a=0&b=0"), 404, "bad_index");

  CheckEnvelope(Send(c, "POST", "/sessions", Json::object()), 422, "invalid_argument");
  CheckEnvelope(Send(c, "POST", "/sessions", Json{{"dataset", "../etc/passwd"}}), 422,
                "invalid_argument");
  CheckEnvelope(Send(c, "POST", "/sessions", Json{{"dataset", "missing.csv"}}), 422, "io");
  CheckEnvelope(Send(c, "POST", "/sessions",
                     Json{{"synthetic", {{"customers", 500}}}, {"config", {{"energy_k", 0}}}}),
                422, "invalid_argument");
  // Failed creations leave nothing behind.
  CHECK(server.service().session_count() == 1);
}

TEST_CASE("datasets from the data dir and uploads") {
  const auto dir = testing::FreshDir("service-datasets");
  const auto corpus = testing::MakePlantedCorpus(800, 5);
  data::WriteCsv(*corpus.table, dir / "split.csv", true);
  data::WriteCsv(*corpus.table, dir / "unsplit.csv", false);
  LiveServer server(dir);
  auto c = server.client();

  const auto from_dir = Send(c, "POST", "/sessions", Json{{"dataset", "split.csv"}, {"config", FastConfig()}});
  CHECK(from_dir.status == 201);
  CHECK(from_dir.body["rows"] == 800);

  CheckEnvelope(Send(c, "POST", "/sessions", Json{{"dataset", "unsplit.csv"}}), 422,
                "unsplit_dataset");
  const auto resplit =
      Send(c, "POST", "/sessions", Json{{"dataset", "unsplit.csv"}, {"split", {{"seed", 2}}}});
  CHECK(resplit.status == 201);

  const auto upload = Send(c, "POST", "/sessions",
                           Json{{"csv", data::FormatCsv(*corpus.table, true)}, {"config", FastConfig()}});
  CHECK(upload.status == 201);
  CheckEnvelope(Send(c, "POST", "/sessions", Json{{"csv", "customer_id,label_kwh\nA,x\n"}}), 422,
                "non_numeric_cell");
}

TEST_CASE("second writer gets 409 while readers proceed") {
  const auto dir = testing::FreshDir("service-busy");
  LiveServer server(dir);
  auto c = server.client();
  const std::string id = Send(c, "POST", "/sessions", SyntheticRequest()).body["session_id"];
  {
    auto held = server.service().HoldWriter(id);
    CheckEnvelope(Send(c, "POST", "/sessions/" + id + "/actions",
                       Json{{"kind", "drop_feature"}, {"feature", "#Threats"}}),
                  409, "session_busy");
    CheckEnvelope(Send(c, "POST", "/sessions/" + id + "/iterations"), 409, "session_busy");
    CHECK(Send(c, "GET", "/sessions/" + id + "/history").status == 200);
    CHECK(Send(c, "GET", "/sessions/" + id).status == 200);
  }
  CHECK(Send(c, "POST", "/sessions/" + id + "/actions",
             Json{{"kind", "drop_feature"}, {"feature", "#Threats"}})
            .status == 200);
}

TEST_CASE("cors and compression") {
  const auto dir = testing::FreshDir("service-headers");
  LiveServer server(dir);
  auto c = server.client();
  const auto options = c.Options("/sessions");
  REQUIRE(options);
  CHECK(options->status == 204);
  CHECK(options->get_header_value("Access-Control-Allow-Origin") == "*");

  const std::string id = Send(c, "POST", "/sessions", SyntheticRequest()).body["session_id"];
  Send(c, "POST", "/sessions/" + id + "/iterations");
  c.set_decompress(false);
  const auto raw = c.Get("/sessions/" + id + "/iterations/0/shap",
                         httplib::Headers{{"Accept-Encoding", "gzip"}});
  REQUIRE(raw);
  CHECK(raw->get_header_value("Content-Encoding") == "gzip");
  CHECK(raw->get_header_value("Access-Control-Allow-Origin") == "*");
}

TEST_CASE("sessions survive a restart") {
  const auto dir = testing::FreshDir("service-restart");
  std::string id, history;
  {
    LiveServer server(dir);
    auto c = server.client();
    id = Send(c, "POST", "/sessions", SyntheticRequest()).body["session_id"];
    Send(c, "POST", "/sessions/" + id + "/iterations");
    Send(c, "POST", "/sessions/" + id + "/actions", Json{{"kind", "drop_feature"}, {"feature", "#Threats"}});
    Send(c, "POST", "/sessions/" + id + "/iterations");
    history = Send(c, "GET", "/sessions/" + id + "/history").raw;
  }
  LiveServer restarted(dir);
  auto c = restarted.client();
  CHECK(restarted.service().session_count() == 1);
  CHECK(Send(c, "GET", "/sessions/" + id + "/history").raw == history);
  const auto next = Send(c, "POST", "/sessions", SyntheticRequest());
  CHECK(next.body["session_id"] != id);
}

}  // namespace
}  // namespace ntlwb::service
