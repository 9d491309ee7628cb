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

#include <httplib.h>

#include <charconv>

#include "etr/error.h"

namespace etr::service {
namespace {

using agreement::AnnotationRecord;

void Reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void Fail(httplib::Response& res, int status, const std::string& message,
          const std::vector<std::string>& reasons = {}) {
  Json body = {{"error", message}};
  if (!reasons.empty()) body["reasons"] = reasons;
  Reply(res, status, body);
}

std::string BearerToken(const httplib::Request& req) {
  const std::string header = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (header.size() <= kPrefix.size() || header.compare(0, kPrefix.size(), kPrefix) != 0) return {};
  return header.substr(kPrefix.size());
}

Json ParseBody(const httplib::Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed JSON body: ") + e.what());
  }
}

const char* SubmitStatusName(SubmitStatus s) {
  switch (s) {
    case SubmitStatus::kAccepted: return "accepted";
    case SubmitStatus::kDuplicate: return "duplicate";
    case SubmitStatus::kRejected: return "rejected";
    case SubmitStatus::kConflict: return "conflict";
  }
  return "unknown";
}

}  // namespace

HttpServer::HttpServer(CampaignService& service, HttpOptions options)
    : service_(service), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  if (options_.admin_token.empty()) throw Error("admin token must not be empty");
  Routes();
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::Listen() { server_->listen_after_bind(); }

void HttpServer::Start() {
  thread_ = std::thread([this] { Listen(); });
  server_->wait_until_ready();
}

void HttpServer::Stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void HttpServer::Routes() {
  auto& s = *server_;
  s.set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin},
                         {"Access-Control-Allow-Headers", "Authorization, Content-Type"},
                         {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const NotFound& e) {
      Fail(res, 404, e.what());
    } catch (const IoError& e) {
      Fail(res, 500, e.what());
    } catch (const Error& e) {
      Fail(res, 400, e.what());
    } catch (const std::exception& e) {
      Fail(res, 500, e.what());
    }
  });

  const auto is_admin = [this](const httplib::Request& req) {
    return BearerToken(req) == options_.admin_token;
  };

  s.Post("/campaigns", [this, is_admin](const httplib::Request& req, httplib::Response& res) {
    if (!is_admin(req)) return Fail(res, 401, "admin token required");
    const Json body = ParseBody(req);
    if (!body.is_object()) throw Error("body must be an object");
    std::optional<agreement::Questionnaire> q;
    if (body.contains("questionnaire")) {
      q = agreement::Questionnaire::FromJson(body["questionnaire"]);
    } else if (options_.default_questionnaire) {
      q = options_.default_questionnaire;
    } else {
      throw Error("missing questionnaire");
    }
    if (!body.contains("pool") || !body["pool"].is_array()) throw Error("missing pool array");
    if (!body.contains("roster") || !body["roster"].is_array()) throw Error("missing roster array");
    std::vector<PoolItem> pool;
    for (const auto& item : body["pool"]) pool.push_back(PoolItemFromJson(item));
    std::vector<std::string> roster;
    for (const auto& a : body["roster"]) {
      if (!a.is_string()) throw Error("roster entries must be strings");
      roster.push_back(a.get<std::string>());
    }
    CampaignSpec spec{OptionalString(body, "campaign_id", ""), std::move(*q), std::move(pool),
                      std::move(roster), PolicyFromJson(body.value("policy", Json()))};
    const auto created = service_.CreateCampaign(std::move(spec));
    Reply(res, 201, {{"campaign_id", created.campaign_id},
                     {"tokens", created.tokens},
                     {"items_per_annotator", created.items_per_annotator}});
  });

  s.Get(R"(/campaigns/([^/]+))", [this, is_admin](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const Json info = service_.PublicInfo(id);
    if (!is_admin(req) && !service_.AnnotatorForToken(id, BearerToken(req))) {
      return Fail(res, 401, "valid token required");
    }
    Reply(res, 200, info);
  });

  s.Get(R"(/campaigns/([^/]+)/assignments/([^/]+))",
        [this, is_admin](const httplib::Request& req, httplib::Response& res) {
          const std::string id = req.matches[1];
          const std::string annotator = req.matches[2];
          service_.PublicInfo(id);  // 404 before 401 for unknown campaigns
          if (!is_admin(req) && !service_.CheckToken(id, annotator, BearerToken(req))) {
            return Fail(res, 401, "token does not belong to annotator '" + annotator + "'");
          }
          Reply(res, 200, service_.Assignment(id, annotator));
        });

  s.Post(R"(/campaigns/([^/]+)/responses)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto owner = service_.AnnotatorForToken(id, BearerToken(req));
    if (!owner) return Fail(res, 401, "valid annotator token required");
    const Json body = ParseBody(req);
    AnnotationRecord record;
    try {
      record = agreement::RecordFromJson(body);
    } catch (const Error& e) {
      return Fail(res, 422, "rejected", {e.what()});
    }
    if (record.annotator_id != *owner) {
      return Fail(res, 403, "token does not belong to annotator '" + record.annotator_id + "'");
    }
    const auto result = service_.Submit(id, std::move(record));
    Json body_out = {{"status", SubmitStatusName(result.status)}, {"reasons", result.reasons}};
    switch (result.status) {
      case SubmitStatus::kAccepted: return Reply(res, 201, body_out);
      case SubmitStatus::kDuplicate: return Reply(res, 200, body_out);
      case SubmitStatus::kRejected: return Reply(res, 422, body_out);
      case SubmitStatus::kConflict: return Reply(res, 409, body_out);
    }
  });

  s.Get(R"(/campaigns/([^/]+)/progress)", [this, is_admin](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    service_.PublicInfo(id);
    if (!is_admin(req)) return Fail(res, 401, "admin token required");
    Json out = Json::object();
    for (const auto& [annotator, p] : service_.Progress(id)) {
      out[annotator] = {{"done", p.done}, {"pending", p.pending}};
    }
    Reply(res, 200, {{"campaign_id", id}, {"annotators", out}});
  });

  s.Get(R"(/campaigns/([^/]+)/export)", [this, is_admin](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    service_.PublicInfo(id);
    if (!is_admin(req)) return Fail(res, 401, "admin token required");
    res.set_content(service_.Export(id), "application/x-ndjson");
  });

  s.Get(R"(/campaigns/([^/]+)/agreement)", [this, is_admin](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    service_.PublicInfo(id);
    if (!is_admin(req)) return Fail(res, 401, "admin token required");
    std::optional<agreement::Level> level;
    const std::string level_arg = req.get_param_value("level");
    if (!level_arg.empty() && level_arg != "auto") {
      level = agreement::ParseLevel(level_arg);
      if (!level) return Fail(res, 400, "level must be nominal, interval or auto");
    }
    std::optional<int> threshold;
    const std::string t = req.get_param_value("threshold");
    if (!t.empty()) {
      int v = 0;
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc() || ptr != t.data() + t.size() || v < 1 || v > 4) {
        return Fail(res, 400, "threshold must be an integer in 1..4");
      }
      threshold = v;
    }
    try {
      Reply(res, 200, service_.AgreementReport(id, level, threshold));
    } catch (const NotFound&) {
      throw;
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      Fail(res, 422, e.what());
    }
  });
}

}  // namespace etr::service
