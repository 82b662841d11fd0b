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

#include "bevroute/server.hpp"

#include <charconv>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "bevroute/error.hpp"
#include "bevroute/weights_io.hpp"

namespace bevroute {

namespace {

using nlohmann::json;

HttpReply error_reply(const std::string& stage_name, const std::string& message) {
  return {http_status_for_stage(stage_name), json{{"error", message}, {"stage", stage_name}}.dump()};
}

}  // namespace

int http_status_for_stage(std::string_view stage_name) noexcept {
  if (stage_name == stage::kConfig || stage_name == stage::kRoute) return 400;
  if (stage_name == stage::kMap) return 502;
  return 500;
}

EstimateService::EstimateService(PipelineConfig cfg, PipelineResources resources)
    : cfg_(std::move(cfg)), resources_(std::move(resources)) {
  if (!resources_.model) {
    try {
      resources_.model = std::make_shared<const DriverModel>(load_weights_file(cfg_.weights_path));
    } catch (const std::exception& e) {
      load_error_ = e.what();
    }
  }
  if (!resources_.provider) resources_.provider = make_attribute_provider(cfg_);
}

HttpReply EstimateService::estimate(std::string_view body) const {
  json request;
  try {
    request = json::parse(body.begin(), body.end());
  } catch (const json::parse_error& e) {
    return error_reply(stage::kRoute, std::string("malformed GeoJSON: ") + e.what());
  }

  PipelineConfig cfg = cfg_;
  std::string route_text;
  if (request.is_object() && request.contains("route")) {
    for (const auto& [key, _] : request.items()) {
      if (key != "route" && key != "config") return error_reply(stage::kConfig, "unknown request field '" + key + "'");
    }
    if (request.contains("config")) {
      try {
        cfg = apply_config_overrides(cfg_, request["config"]);
      } catch (const std::exception& e) {
        return error_reply(stage::kConfig, e.what());
      }
    }
    route_text = request["route"].dump();
  } else {
    route_text = std::string(body);
  }

  if (!resources_.model) return error_reply(stage::kDriver, "weights not loaded: " + load_error_);
  try {
    return {200, serialize_result(run_pipeline(route_text, cfg, resources_))};
  } catch (const StageError& e) {
    return error_reply(e.stage(), e.detail());
  } catch (const std::exception& e) {
    return error_reply(stage::kConfig, e.what());
  }
}

HttpReply EstimateService::health() const {
  json doc{{"status", weights_loaded() ? "ok" : "degraded"}, {"weights_loaded", weights_loaded()}};
  if (!load_error_.empty()) doc["detail"] = load_error_;
  return {200, doc.dump()};
}

HttpReply EstimateService::config() const { return {200, config_to_json(cfg_).dump()}; }

BindAddress parse_bind_address(std::string_view text) {
  BindAddress out;
  std::string_view port_text = text;
  if (const auto colon = text.rfind(':'); colon != std::string_view::npos) {
    out.host = std::string(text.substr(0, colon));
    port_text = text.substr(colon + 1);
  }
  if (out.host.empty()) out.host = "0.0.0.0";
  int port = -1;
  const auto [end, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || end != port_text.data() + port_text.size() || port < 0 || port > 65535) {
    throw Error("invalid bind address '" + std::string(text) + "'");
  }
  out.port = port;
  return out;
}

struct HttpServer::Impl {
  std::shared_ptr<const EstimateService> service;
  httplib::Server server;
  std::thread worker;
};

HttpServer::HttpServer(std::shared_ptr<const EstimateService> service) : impl_(std::make_unique<Impl>()) {
  if (!service) throw Error("HttpServer needs a service");
  impl_->service = std::move(service);
  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(reply.body, "application/json");
  };
  auto& svc = impl_->service;
  impl_->server.Post("/estimate", [svc, send](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->estimate(req.body));
  });
  impl_->server.Get("/health", [svc, send](const httplib::Request&, httplib::Response& res) {
    send(res, svc->health());
  });
  impl_->server.Get("/config", [svc, send](const httplib::Request&, httplib::Response& res) {
    send(res, svc->config());
  });
  impl_->server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const BindAddress& address) {
  const int port = address.port == 0 ? impl_->server.bind_to_any_port(address.host)
                                     : (impl_->server.bind_to_port(address.host, address.port) ? address.port : -1);
  if (port < 0) throw Error("cannot bind " + address.host + ":" + std::to_string(address.port));
  return port;
}

void HttpServer::run() {
  if (!impl_->server.listen_after_bind()) throw Error("HTTP server stopped unexpectedly");
}

void HttpServer::start() {
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace bevroute
