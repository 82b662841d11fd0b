// Copyright 2026 The bevroute Authors
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

#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "bevroute/pipeline.hpp"

namespace bevroute {

struct HttpReply {
  int status = 200;
  std::string body;
};

// 400 for request and route problems, 502 when the map service failed,
// 500 for everything else.
int http_status_for_stage(std::string_view stage) noexcept;

// Request handling independent of the transport. The driver model is loaded
// once at construction and shared by all requests.
class EstimateService {
 public:
  explicit EstimateService(PipelineConfig cfg, PipelineResources resources = {});

  // Body: a GeoJSON document, or {"route": <GeoJSON>, "config": {overrides}}.
  HttpReply estimate(std::string_view body) const;
  HttpReply health() const;
  HttpReply config() const;

  bool weights_loaded() const noexcept { return resources_.model != nullptr; }

 private:
  PipelineConfig cfg_;
  PipelineResources resources_;
  std::string load_error_;
};

struct BindAddress {
  std::string host;
  int port = 0;
};

// "host:port", ":port" or "port".
BindAddress parse_bind_address(std::string_view text);

class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<const EstimateService> service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds the socket; port 0 picks a free port. Returns the bound port.
  int bind(const BindAddress& address);
  // Serves on the calling thread until stop().
  void run();
  // Serves on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bevroute
