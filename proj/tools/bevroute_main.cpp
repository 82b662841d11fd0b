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

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "bevroute/error.hpp"
#include "bevroute/pipeline.hpp"
#include "bevroute/server.hpp"
#include "bevroute/weights_io.hpp"

namespace {

std::string read_file(const std::string& path, const char* stage_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bevroute::StageError(stage_name, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bevroute::PipelineConfig load_config(const std::string& path) {
  try {
    return bevroute::load_config_file(path);
  } catch (const bevroute::StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw bevroute::StageError(bevroute::stage::kConfig, e.what());
  }
}

int run_estimate(const std::string& route_path, const std::string& config_path, const std::string& weights_path,
                 const std::string& out_path, bool offline) {
  auto cfg = load_config(config_path);
  if (!weights_path.empty()) cfg.weights_path = weights_path;
  if (offline) cfg.offline_mode = true;
  const auto route = read_file(route_path, bevroute::stage::kRoute);
  const auto result = bevroute::run_pipeline(route, cfg);
  try {
    bevroute::export_result(result, out_path);
  } catch (const std::exception& e) {
    throw bevroute::StageError(bevroute::stage::kConfig, e.what());
  }
  std::cout << "route " << result.route_length_m << " m, " << result.steps << " steps, "
            << result.energy.wh_per_km << " Wh/km, final SOC " << result.energy.soc.back() << '\n';
  for (const auto& note : result.notes) std::cout << "note: " << note << '\n';
  return 0;
}

bevroute::HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

int run_serve(const std::string& config_path, const std::string& bind) {
  const auto cfg = load_config(config_path);
  const auto address = bevroute::parse_bind_address(bind);
  auto service = std::make_shared<const bevroute::EstimateService>(cfg);
  if (!service->weights_loaded()) std::cerr << "warning: " << service->health().body << '\n';
  bevroute::HttpServer server(service);
  const int port = server.bind(address);
  std::cout << "listening on " << address.host << ':' << port << std::endl;
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  server.run();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Route-level BEV energy estimation"};
  app.require_subcommand(1);

  std::string route_path, config_path, weights_path, out_path, bind = "127.0.0.1:8080";
  bool offline = false;
  auto* estimate = app.add_subcommand("estimate", "Estimate velocity, power and SOC along a route");
  estimate->add_option("--route", route_path, "GeoJSON route")->required();
  estimate->add_option("--config", config_path, "Pipeline configuration JSON")->required();
  estimate->add_option("--weights", weights_path, "Driver model weight container");
  estimate->add_option("--out", out_path, "Result JSON")->required();
  estimate->add_flag("--offline", offline, "Serve map attributes from the configured fixture");

  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "Run the HTTP estimation service");
  serve->add_option("--config", serve_config, "Pipeline configuration JSON")->required();
  serve->add_option("--bind", bind, "host:port")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*estimate) return run_estimate(route_path, config_path, weights_path, out_path, offline);
    return run_serve(serve_config, bind);
  } catch (const bevroute::StageError& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.detail() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error [" << bevroute::stage::kConfig << "]: " << e.what() << '\n';
    return 2;
  }
}
