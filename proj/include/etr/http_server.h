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

#ifndef ETR_HTTP_SERVER_H_
#define ETR_HTTP_SERVER_H_

#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "etr/agreement.h"
#include "etr/service.h"

namespace httplib {
class Server;
}

namespace etr::service {

struct HttpOptions {
  // Required for campaign creation, progress, export and agreement.
  std::string admin_token;
  // Used by POST /campaigns when the body has no "questionnaire".
  std::optional<agreement::Questionnaire> default_questionnaire;
  // Value of Access-Control-Allow-Origin.
  std::string cors_origin = "*";
};

// JSON API over a CampaignService.
//
//   POST /campaigns                               admin
//   GET  /campaigns/{id}                          admin or any annotator of id
//   GET  /campaigns/{id}/assignments/{annotator}  admin or that annotator
//   POST /campaigns/{id}/responses                the record's annotator
//   GET  /campaigns/{id}/progress                 admin
//   GET  /campaigns/{id}/export                   admin
//   GET  /campaigns/{id}/agreement?level=&threshold=  admin
//
// Credentials travel as "Authorization: Bearer <token>".
class HttpServer {
 public:
  HttpServer(CampaignService& service, HttpOptions options);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 binds an ephemeral port. Returns the bound port.
  int Bind(const std::string& host, int port);
  // Serves until Stop(). Call after Bind.
  void Listen();
  // Listen() on a background thread.
  void Start();
  void Stop();

 private:
  void Routes();

  CampaignService& service_;
  HttpOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace etr::service

#endif  // ETR_HTTP_SERVER_H_
