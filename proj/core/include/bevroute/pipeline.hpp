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

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bevroute/energy_model.hpp"
#include "bevroute/lstm_model.hpp"
#include "bevroute/map_client.hpp"
#include "bevroute/pid_sim.hpp"
#include "bevroute/velocity_predictor.hpp"
#include "bevroute/velocity_rules.hpp"
#include "bevroute/zero_phase_filter.hpp"

namespace bevroute {

// Stage names used for error attribution.
namespace stage {
inline constexpr const char* kConfig = "service-cli";
inline constexpr const char* kRoute = "route-model";
inline constexpr const char* kMap = "map-client";
inline constexpr const char* kRules = "velocity-rules";
inline constexpr const char* kSim = "pid-sim";
inline constexpr const char* kDriver = "driver-lstm";
inline constexpr const char* kEnergy = "energy-model";
}  // namespace stage

struct PipelineConfig {
  RuleThresholds thresholds;
  ControllerConfig controller;
  FilterConfig filter;
  VehicleParams vehicle;
  EndpointConfig endpoints;
  InferenceOptions inference;
  std::filesystem::path weights_path;
  std::filesystem::path fixture_path;  // attribute records served in offline mode
  double fixture_tolerance_m = 25.0;
  double initial_soc = 0.95;
  bool offline_mode = false;
  // Spacing of the map attribute queries along the route; 1 queries every step.
  double feature_spacing_m = 10.0;

  void validate() const;
};

// Mirrors PipelineConfig field by field. Unknown keys are rejected and
// relative paths are resolved against base_dir.
PipelineConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config_file(const std::filesystem::path& path);

// Applies a JSON merge patch of config overrides. Paths and endpoints
// cannot be overridden.
PipelineConfig apply_config_overrides(const PipelineConfig& base, const nlohmann::json& overrides);

struct Annotation {
  std::string kind;  // stop, curve, grade_max, grade_min, battery_limit
  double distance_m = 0.0;
  double value = 0.0;
  std::string label;
};

struct EstimateResult {
  double route_length_m = 0.0;
  std::size_t steps = 0;
  std::vector<double> distance_m;
  std::vector<ReferencePoint> reference;
  std::vector<double> velocity_ref;
  std::vector<double> velocity_pid;
  std::vector<double> velocity_pred;
  std::vector<double> grade;
  EnergyResult energy;
  double sim_duration_s = 0.0;
  std::size_t sim_stops = 0;
  std::vector<WindowReport> windows;
  std::vector<Annotation> annotations;
  std::map<std::string, std::size_t> defaults_applied;
  std::vector<std::string> notes;
};

// Optional shared inputs. A missing model is loaded from cfg.weights_path and
// a missing provider is built from the offline/online configuration.
struct PipelineResources {
  std::shared_ptr<const DriverModel> model;
  std::shared_ptr<const AttributeProvider> provider;
};

std::shared_ptr<const AttributeProvider> make_attribute_provider(const PipelineConfig& cfg);

// Errors leave as StageError naming the failing stage.
EstimateResult run_pipeline(std::string_view route_document, const PipelineConfig& cfg,
                            const PipelineResources& resources = {});

inline constexpr std::string_view kResultSchema = "bevroute.estimate";

nlohmann::json result_to_json(const EstimateResult& result);
std::string serialize_result(const EstimateResult& result);
void export_result(const EstimateResult& result, const std::filesystem::path& path);

// Series columns every exported document carries.
const std::vector<std::string>& result_series_names();

struct EstimateDocument {
  std::map<std::string, std::vector<double>> series;
  std::vector<Annotation> annotations;
  nlohmann::json summary;
  std::size_t steps = 0;
};

// Validates an exported document against the schema: all series present,
// finite and of the declared step count.
EstimateDocument parse_estimate_document(std::string_view document);

}  // namespace bevroute
