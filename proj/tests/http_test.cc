// Copyright 2026 The etrkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "etr/http_server.h"

#include <gtest/gtest.h>
#include <httplib.h>

#include "test_util.h"

namespace etr::service {
namespace {

using agreement::Category;
using agreement::Questionnaire;
using agreement::Scale;

constexpr char kAdmin[] = "admin-secret";

Questionnaire Small() {
  return Questionnaire({{"ic1", Category::kIC, "p", Scale::kBinary, 1.0},
                        {"gen1", Category::kGeneral, "p", Scale::kLikert5, 1.0}},
                       "small");
}

Json PoolJson() {
  Json pool = Json::array();
  int n = 0;
  for (const std::string m : {"model-a", "model-b"}) {
    for (int i = 0; i < 3; ++i) {
      pool.push_back({{"item_id", "item" + std::to_string(n++)},
                      {"model_label", m},
                      {"dataset_tag", "etr-fr"},
                      {"source", "Texte source."},
                      {"candidate", "Texte facile."}});
    }
    for (int i = 0; i < 2; ++i) {
      pool.push_back({{"item_id", "item" + std::to_string(n++)},
                      {"model_label", m},
                      {"dataset_tag", "etr-fr-politic"},
                      {"source", "Texte source."},
                      {"candidate", "Texte facile."}});
    }
  }
  return pool;
}

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    service_ = std::make_unique<CampaignService>(dir_.path());
    server_ = std::make_unique<HttpServer>(*service_, HttpOptions{kAdmin, Small()});
    port_ = server_->Bind("127.0.0.1", 0);
    server_->Start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override { server_->Stop(); }

  httplib::Headers Auth(const std::string& token) { return {{"Authorization", "Bearer " + token}}; }

  httplib::Result Post(const std::string& path, const Json& body, const std::string& token) {
    return client_->Post(path.c_str(), Auth(token), body.dump(), "application/json");
  }
  httplib::Result Get(const std::string& path, const std::string& token) {
    return client_->Get(path.c_str(), Auth(token));
  }

  // Creates a campaign with 2 annotators and 3+2 items per model.
  Json Create() {
    const Json body = {{"pool", PoolJson()},
                       {"roster", {"ann1", "ann2"}},
                       {"policy", {{"per_model_in_domain", 3}, {"per_model_out_domain", 2}, {"seed", 5}}}};
    auto res = Post("/campaigns", body, kAdmin);
    EXPECT_EQ(res->status, 201) << res->body;
    return Json::parse(res->body);
  }

  Json Answer(const std::string& annotator, const std::string& item, int ic1, int gen1) {
    return {{"annotator_id", annotator}, {"item_id", item}, {"answers", {{"ic1", ic1}, {"gen1", gen1}}}};
  }

  testutil::TempDir dir_;
  std::unique_ptr<CampaignService> service_;
  std::unique_ptr<HttpServer> server_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(HttpTest, CreateRequiresAdmin) {
  EXPECT_EQ(Post("/campaigns", {{"pool", PoolJson()}, {"roster", {"a"}}}, "wrong")->status, 401);
  EXPECT_EQ(client_->Post("/campaigns", "{}", "application/json")->status, 401);
  EXPECT_EQ(Post("/campaigns", {{"roster", {"a"}}}, kAdmin)->status, 400);
  auto bad = client_->Post("/campaigns", Auth(kAdmin), "{not json", "application/json");
  EXPECT_EQ(bad->status, 400);
  const Json created = Create();
  EXPECT_EQ(created["items_per_annotator"], 10);
  EXPECT_EQ(created["tokens"].size(), 2u);
}

TEST_F(HttpTest, CorsPreflight) {
  auto res = client_->Options("/campaigns/anything/responses");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  EXPECT_NE(res->get_header_value("Access-Control-Allow-Headers").find("Authorization"), std::string::npos);
}

TEST_F(HttpTest, AnnotatorViewsHideModelLabels) {
  const Json c = Create();
  const std::string id = c["campaign_id"], t1 = c["tokens"]["ann1"], t2 = c["tokens"]["ann2"];
  auto info = Get("/campaigns/" + id, t1);
  EXPECT_EQ(info->status, 200);
  EXPECT_EQ(info->body.find("model-"), std::string::npos);
  EXPECT_EQ(Get("/campaigns/" + id, "nope")->status, 401);
  EXPECT_EQ(Get("/campaigns/unknown", kAdmin)->status, 404);

  auto mine = Get("/campaigns/" + id + "/assignments/ann1", t1);
  EXPECT_EQ(mine->status, 200);
  EXPECT_EQ(mine->body.find("model_label"), std::string::npos);
  EXPECT_EQ(mine->body.find("model-"), std::string::npos);
  EXPECT_EQ(Json::parse(mine->body)["items"].size(), 10u);
  EXPECT_EQ(Get("/campaigns/" + id + "/assignments/ann1", t2)->status, 401);
  EXPECT_EQ(Get("/campaigns/" + id + "/assignments/ann1", kAdmin)->status, 200);
}

TEST_F(HttpTest, ResponseStatusCodes) {
  const Json c = Create();
  const std::string id = c["campaign_id"], t1 = c["tokens"]["ann1"];
  const std::string path = "/campaigns/" + id + "/responses";
  const Json items = Json::parse(Get("/campaigns/" + id + "/assignments/ann1", t1)->body)["items"];
  const std::string item = items[0]["item_id"];

  EXPECT_EQ(Post(path, Answer("ann1", item, 1, 3), "bad")->status, 401);
  EXPECT_EQ(Post(path, Answer("ann2", item, 1, 3), t1)->status, 403);
  auto accepted = Post(path, Answer("ann1", item, 1, 3), t1);
  EXPECT_EQ(accepted->status, 201);
  EXPECT_EQ(Json::parse(accepted->body)["status"], "accepted");
  auto dup = Post(path, Answer("ann1", item, 1, 3), t1);
  EXPECT_EQ(dup->status, 200);
  EXPECT_EQ(Json::parse(dup->body)["status"], "duplicate");
  EXPECT_EQ(Post(path, Answer("ann1", item, 0, 3), t1)->status, 409);
  auto rejected = Post(path, Answer("ann1", items[1]["item_id"], 1, 9), t1);
  EXPECT_EQ(rejected->status, 422);
  EXPECT_FALSE(Json::parse(rejected->body)["reasons"].empty());
  EXPECT_EQ(Post(path, {{"annotator_id", "ann1"}, {"item_id", item}}, t1)->status, 422);
  EXPECT_EQ(Post("/campaigns/unknown/responses", Answer("ann1", item, 1, 3), t1)->status, 404);

  auto progress = Get("/campaigns/" + id + "/progress", kAdmin);
  EXPECT_EQ(progress->status, 200);
  const Json p = Json::parse(progress->body)["annotators"];
  EXPECT_EQ(p["ann1"]["done"], 1);
  EXPECT_EQ(p["ann1"]["pending"], 9);
  EXPECT_EQ(Get("/campaigns/" + id + "/progress", t1)->status, 401);
}

TEST_F(HttpTest, ExportAndAgreement) {
  const Json c = Create();
  const std::string id = c["campaign_id"];
  const std::string path = "/campaigns/" + id + "/responses";
  const Json items = Json::parse(Get("/campaigns/" + id + "/assignments/ann1", kAdmin)->body)["items"];

  auto empty = Get("/campaigns/" + id + "/export", kAdmin);
  EXPECT_EQ(empty->status, 200);
  EXPECT_EQ(empty->get_header_value("Content-Type"), "application/x-ndjson");
  EXPECT_TRUE(agreement::ParseAnnotationExport(empty->body, "http").records.empty());
  EXPECT_EQ(Get("/campaigns/" + id + "/agreement", kAdmin)->status, 422);

  for (std::size_t i = 0; i < items.size(); ++i) {
    for (const std::string ann : {"ann1", "ann2"}) {
      const std::string token = c["tokens"][ann];
      const int v = static_cast<int>(i % 2);
      EXPECT_EQ(Post(path, Answer(ann, items[i]["item_id"], v, 2 * v + (ann == "ann2" && i == 3)), token)->status,
                201);
    }
  }
  auto exported = Get("/campaigns/" + id + "/export", kAdmin);
  const auto parsed = agreement::ParseAnnotationExport(exported->body, "http");
  EXPECT_EQ(parsed.records.size(), 20u);
  EXPECT_EQ(Get("/campaigns/" + id + "/export", c["tokens"]["ann1"])->status, 401);

  auto report = Get("/campaigns/" + id + "/agreement?threshold=2", kAdmin);
  ASSERT_EQ(report->status, 200) << report->body;
  const Json r = Json::parse(report->body);
  const auto offline = agreement::PerCriterionAlpha(parsed.records, *parsed.questionnaire);
  EXPECT_EQ(r["per_criterion"], agreement::AlphaReportToJson(offline)["per_criterion"]);
  EXPECT_TRUE(r.contains("binarized"));
  EXPECT_EQ(r["per_criterion"][0]["alpha"], 1.0);
  EXPECT_EQ(Get("/campaigns/" + id + "/agreement?level=ordinal", kAdmin)->status, 400);
  EXPECT_EQ(Get("/campaigns/" + id + "/agreement?threshold=7", kAdmin)->status, 400);
  EXPECT_EQ(Get("/campaigns/" + id + "/agreement?level=nominal", kAdmin)->status, 200);
}

}  // namespace
}  // namespace etr::service
