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

#include "bevroute/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include "bevroute/error.hpp"
#include "bevroute/route_model.hpp"
#include "bevroute/weights_io.hpp"

namespace bevroute {

namespace {

using nlohmann::json;

// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw Error("config: " + where_ + " must be an object");
  }
  ~ObjectReader() = default;

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw Error("config: " + where_ + "." + key + " has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.contains(key)) throw Error("config: unknown key '" + where_ + "." + key + "'");
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::string& s, const std::filesystem::path& base) {
  if (s.empty()) return {};
  std::filesystem::path p(s);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

template <typename Fn>
auto in_stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::vector<Annotation> build_annotations(const EstimateResult& r) {
  std::vector<Annotation> out;
  for (std::size_t i = 0; i < r.reference.size(); ++i) {
    const auto& p = r.reference[i];
    if (p.limit_type == LimitType::Stop) {
      out.push_back({"stop", p.arc_length, 0.0, "stop"});
    } else if (p.limit_type == LimitType::Curve &&
               (i == 0 || r.reference[i - 1].limit_type != LimitType::Curve)) {
      double v_min = p.v_ref;
      for (std::size_t j = i; j < r.reference.size() && r.reference[j].limit_type == LimitType::Curve; ++j) {
        v_min = std::min(v_min, r.reference[j].v_ref);
      }
      out.push_back({"curve", p.arc_length, v_min, "curve speed"});
    }
  }
  if (!r.grade.empty()) {
    const auto [lo, hi] = std::minmax_element(r.grade.begin(), r.grade.end());
    out.push_back({"grade_max", r.distance_m[static_cast<std::size_t>(hi - r.grade.begin())], *hi, "steepest climb"});
    out.push_back({"grade_min", r.distance_m[static_cast<std::size_t>(lo - r.grade.begin())], *lo, "steepest descent"});
  }
  if (!r.energy.clamp_steps.empty()) {
    const std::size_t i = r.energy.clamp_steps.front();
    out.push_back({"battery_limit", r.distance_m[i], r.energy.soc[i], "battery limit reached"});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Annotation& a, const Annotation& b) { return a.distance_m < b.distance_m; });
  return out;
}

std::vector<double> require_series(const json& doc, const std::string& name) {
  const auto it = doc.find(name);
  if (it == doc.end() || !it->is_array()) throw Error("estimate document: missing series '" + name + "'");
  std::vector<double> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) throw Error("estimate document: non-numeric value in '" + name + "'");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw Error("estimate document: non-finite value in '" + name + "'");
    out.push_back(x);
  }
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  thresholds.validate();
  controller.validate();
  filter.validate();
  vehicle.validate();
  endpoints.validate();
  if (!(initial_soc >= vehicle.soc_min && initial_soc <= vehicle.soc_max)) {
    throw Error("initial_soc outside the SOC operating range");
  }
  if (!(feature_spacing_m >= 1.0) || !std::isfinite(feature_spacing_m)) throw Error("feature_spacing_m must be >= 1");
  if (!(fixture_tolerance_m > 0.0)) throw Error("fixture_tolerance_m must be positive");
  if (!(inference.stop_indicator_window_m >= 0.0)) throw Error("stop_indicator_window_m must be non-negative");
  if (offline_mode && fixture_path.empty()) throw Error("offline mode requires fixture_path");
}

PipelineConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  ObjectReader root(doc, "config");
  if (const auto* t = root.child("thresholds")) {
    ObjectReader r(*t, "thresholds");
    r.get("heading_change_deg", cfg.thresholds.heading_change_deg);
    r.get("curvature", cfg.thresholds.curvature);
    r.get("stop_merge_window_m", cfg.thresholds.stop_merge_window_m);
    r.finish();
  }
  if (const auto* c = root.child("controller")) {
    auto& k = cfg.controller;
    ObjectReader r(*c, "controller");
    r.get("k1", k.k1);
    r.get("k2", k.k2);
    r.get("k3", k.k3);
    r.get("a_min", k.a_min);
    r.get("a_max", k.a_max);
    r.get("j_min", k.j_min);
    r.get("j_max", k.j_max);
    r.get("h", k.h);
    r.get("k_curve", k.k_curve);
    r.get("a0", k.a0);
    r.get("v_stop_eps", k.v_stop_eps);
    r.get("stop_dwell_s", k.stop_dwell_s);
    r.get("stop_tolerance_m", k.stop_tolerance_m);
    r.get("lut_v_max", k.lut_v_max);
    r.get("lut_dv", k.lut_dv);
    r.get("lut_max_time_s", k.lut_max_time_s);
    r.get("max_time_factor", k.max_time_factor);
    r.get("stop_time_allowance_s", k.stop_time_allowance_s);
    r.finish();
  }
  if (const auto* f = root.child("filter")) {
    ObjectReader r(*f, "filter");
    r.get("cutoff", cfg.filter.cutoff);
    r.finish();
  }
  if (const auto* v = root.child("vehicle")) {
    auto& p = cfg.vehicle;
    ObjectReader r(*v, "vehicle");
    r.get("mass", p.mass);
    r.get("gravity", p.gravity);
    r.get("air_density", p.air_density);
    r.get("frontal_area", p.frontal_area);
    r.get("drag_coefficient", p.drag_coefficient);
    r.get("rolling_cr", p.rolling_cr);
    r.get("rolling_c1", p.rolling_c1);
    r.get("rolling_c2", p.rolling_c2);
    r.get("eta_driveline", p.eta_driveline);
    r.get("eta_motor", p.eta_motor);
    r.get("eta_battery", p.eta_battery);
    r.get("regen_alpha", p.regen_alpha);
    r.get("eta_regen_max", p.eta_regen_max);
    r.get("aux_power", p.aux_power);
    r.get("battery_capacity_wh", p.battery_capacity_wh);
    r.get("soc_min", p.soc_min);
    r.get("soc_max", p.soc_max);
    r.get("v_floor", p.v_floor);
    r.finish();
  }
  if (const auto* e = root.child("endpoints")) {
    auto& ep = cfg.endpoints;
    ObjectReader r(*e, "endpoints");
    r.get("primary_base_url", ep.primary_base_url);
    r.get("fallback_base_url", ep.fallback_base_url);
    r.get("batch_size", ep.batch_size);
    r.get("max_parallel_requests", ep.max_parallel_requests);
    r.get("timeout_s", ep.timeout_s);
    r.get("retry_count", ep.retry_count);
    r.finish();
  }
  if (const auto* i = root.child("inference")) {
    ObjectReader r(*i, "inference");
    r.get("closed_loop", cfg.inference.closed_loop);
    r.get("stop_indicator_window_m", cfg.inference.stop_indicator_window_m);
    r.get("threads", cfg.inference.threads);
    r.finish();
  }
  std::string weights;
  std::string fixture;
  root.get("weights_path", weights);
  root.get("fixture_path", fixture);
  root.get("fixture_tolerance_m", cfg.fixture_tolerance_m);
  root.get("initial_soc", cfg.initial_soc);
  root.get("offline_mode", cfg.offline_mode);
  root.get("feature_spacing_m", cfg.feature_spacing_m);
  root.finish();
  cfg.weights_path = resolve(weights, base_dir);
  cfg.fixture_path = resolve(fixture, base_dir);
  return cfg;
}

json config_to_json(const PipelineConfig& cfg) {
  const auto& k = cfg.controller;
  const auto& p = cfg.vehicle;
  const auto& ep = cfg.endpoints;
  json doc;
  doc["thresholds"] = {{"heading_change_deg", cfg.thresholds.heading_change_deg},
                       {"curvature", cfg.thresholds.curvature},
                       {"stop_merge_window_m", cfg.thresholds.stop_merge_window_m}};
  doc["controller"] = {{"k1", k.k1},
                       {"k2", k.k2},
                       {"k3", k.k3},
                       {"a_min", k.a_min},
                       {"a_max", k.a_max},
                       {"j_min", k.j_min},
                       {"j_max", k.j_max},
                       {"h", k.h},
                       {"k_curve", k.k_curve},
                       {"a0", k.a0},
                       {"v_stop_eps", k.v_stop_eps},
                       {"stop_dwell_s", k.stop_dwell_s},
                       {"stop_tolerance_m", k.stop_tolerance_m},
                       {"lut_v_max", k.lut_v_max},
                       {"lut_dv", k.lut_dv},
                       {"lut_max_time_s", k.lut_max_time_s},
                       {"max_time_factor", k.max_time_factor},
                       {"stop_time_allowance_s", k.stop_time_allowance_s}};
  doc["filter"] = {{"cutoff", cfg.filter.cutoff}};
  doc["vehicle"] = {{"mass", p.mass},
                    {"gravity", p.gravity},
                    {"air_density", p.air_density},
                    {"frontal_area", p.frontal_area},
                    {"drag_coefficient", p.drag_coefficient},
                    {"rolling_cr", p.rolling_cr},
                    {"rolling_c1", p.rolling_c1},
                    {"rolling_c2", p.rolling_c2},
                    {"eta_driveline", p.eta_driveline},
                    {"eta_motor", p.eta_motor},
                    {"eta_battery", p.eta_battery},
                    {"regen_alpha", p.regen_alpha},
                    {"eta_regen_max", p.eta_regen_max},
                    {"aux_power", p.aux_power},
                    {"battery_capacity_wh", p.battery_capacity_wh},
                    {"soc_min", p.soc_min},
                    {"soc_max", p.soc_max},
                    {"v_floor", p.v_floor}};
  doc["endpoints"] = {{"primary_base_url", ep.primary_base_url},
                      {"fallback_base_url", ep.fallback_base_url},
                      {"batch_size", ep.batch_size},
                      {"max_parallel_requests", ep.max_parallel_requests},
                      {"timeout_s", ep.timeout_s},
                      {"retry_count", ep.retry_count}};
  doc["inference"] = {{"closed_loop", cfg.inference.closed_loop},
                      {"stop_indicator_window_m", cfg.inference.stop_indicator_window_m},
                      {"threads", cfg.inference.threads}};
  doc["weights_path"] = cfg.weights_path.string();
  doc["fixture_path"] = cfg.fixture_path.string();
  doc["fixture_tolerance_m"] = cfg.fixture_tolerance_m;
  doc["initial_soc"] = cfg.initial_soc;
  doc["offline_mode"] = cfg.offline_mode;
  doc["feature_spacing_m"] = cfg.feature_spacing_m;
  return doc;
}

PipelineConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("config file not found: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config: malformed JSON: ") + e.what());
  }
  auto cfg = config_from_json(doc, std::filesystem::absolute(path).parent_path());
  cfg.validate();
  return cfg;
}

PipelineConfig apply_config_overrides(const PipelineConfig& base, const json& overrides) {
  if (overrides.is_null()) return base;
  if (!overrides.is_object()) throw Error("config overrides must be an object");
  for (const char* locked : {"weights_path", "fixture_path", "endpoints", "offline_mode"}) {
    if (overrides.contains(locked)) throw Error(std::string("config override of '") + locked + "' is not permitted");
  }
  json merged = config_to_json(base);
  merged.merge_patch(overrides);
  auto cfg = config_from_json(merged);
  cfg.validate();
  return cfg;
}

std::shared_ptr<const AttributeProvider> make_attribute_provider(const PipelineConfig& cfg) {
  if (cfg.offline_mode) return std::make_shared<FixtureProvider>(cfg.fixture_path, cfg.fixture_tolerance_m);
  return std::make_shared<ValhallaClient>(apply_env_overrides(cfg.endpoints));
}

EstimateResult run_pipeline(std::string_view route_document, const PipelineConfig& cfg,
                            const PipelineResources& resources) {
  in_stage(stage::kConfig, [&] { cfg.validate(); });

  auto route = in_stage(stage::kRoute, [&] {
    const auto polyline = parse_route_geojson(route_document);
    return discretize_route(polyline);
  });

  std::shared_ptr<const DriverModel> model = resources.model;
  if (!model) {
    model = in_stage(stage::kDriver, [&] {
      if (cfg.weights_path.empty()) throw Error("no weights_path configured");
      return std::make_shared<const DriverModel>(load_weights_file(cfg.weights_path));
    });
  }

  EstimateResult r;
  const auto merged = in_stage(stage::kMap, [&] {
    const auto provider = resources.provider ? resources.provider : make_attribute_provider(cfg);
    std::vector<GeoPoint> points;
    std::vector<double> arcs;
    double next = 0.0;
    for (std::size_t i = 0; i < route.size(); ++i) {
      const auto& step = route.steps[i];
      if (step.arc_length + 1e-9 >= next || i + 1 == route.size()) {
        points.push_back(step.position);
        arcs.push_back(step.arc_length);
        next = step.arc_length + cfg.feature_spacing_m;
      }
    }
    const auto locate = provider->fetch(points, AttributeService::Locate);
    const auto trace = provider->fetch(points, AttributeService::TraceAttributes);
    const auto height = provider->fetch(points, AttributeService::Height);
    for (const auto* d : {&locate.diagnostics, &trace.diagnostics, &height.diagnostics}) {
      r.notes.insert(r.notes.end(), d->notes.begin(), d->notes.end());
    }
    return merge_attribute_responses(locate.records, trace.records, height.records, arcs);
  });
  r.defaults_applied = merged.defaults_applied;

  route = in_stage(stage::kRoute, [&] {
    const double gap = std::max(kDefaultMaxFeatureGap, 2.0 * cfg.feature_spacing_m);
    return attach_features(std::move(route), merged.nodes, gap);
  });
  r.route_length_m = route.total_length;
  r.steps = route.size();
  r.distance_m = route.arc_lengths();

  r.reference = in_stage(stage::kRules, [&] { return build_reference_profile(route, cfg.thresholds); });
  r.velocity_ref.reserve(r.steps);
  for (const auto& p : r.reference) r.velocity_ref.push_back(p.v_ref);

  const auto past = in_stage(stage::kSim, [&] {
    const auto trace = simulate(r.reference, cfg.controller);
    r.sim_duration_s = trace.duration();
    r.sim_stops = trace.stops.size();
    return resample_trace_to_meters(trace, route);
  });
  r.velocity_pid = past.velocity;

  in_stage(stage::kDriver, [&] {
    const auto stops = stop_positions(r.reference);
    auto inference = batch_inference(route, past, stops, *model, cfg.inference);
    r.windows = std::move(inference.windows);
    r.velocity_pred = zero_phase_filter(inference.velocity, cfg.filter);
    for (double& v : r.velocity_pred) {
      if (!std::isfinite(v)) throw Error("non-finite predicted velocity");
      v = std::max(v, 0.0);
    }
  });

  in_stage(stage::kEnergy, [&] {
    r.grade.reserve(r.steps);
    std::vector<double> intervals;
    intervals.reserve(r.steps);
    for (std::size_t i = 0; i < r.steps; ++i) {
      r.grade.push_back(route.steps[i].features.grade);
      intervals.push_back(route.interval_after(i));
    }
    r.energy = run_energy_model(r.velocity_pred, r.grade, intervals, cfg.initial_soc, cfg.vehicle);
  });

  r.annotations = build_annotations(r);
  return r;
}

const std::vector<std::string>& result_series_names() {
  static const std::vector<std::string> names{"distance_m", "velocity_pred", "velocity_ref", "velocity_pid",
                                              "accel",      "grade",         "p_wheels",     "p_motor",
                                              "p_batt",     "energy_wh",     "soc"};
  return names;
}

json result_to_json(const EstimateResult& r) {
  json doc;
  doc["schema"] = kResultSchema;
  doc["version"] = 1;
  doc["route"] = {{"length_m", r.route_length_m}, {"steps", r.steps}};
  doc["summary"] = {{"ec_wh_per_km", r.energy.wh_per_km},
                    {"energy_wh", r.energy.energy_wh.empty() ? 0.0 : r.energy.energy_wh.back()},
                    {"final_soc", r.energy.soc.empty() ? 0.0 : r.energy.soc.back()},
                    {"sim_duration_s", r.sim_duration_s},
                    {"sim_stops", r.sim_stops},
                    {"battery_limit_steps", r.energy.clamp_steps.size()}};
  doc["distance_m"] = r.distance_m;
  doc["velocity_pred"] = r.velocity_pred;
  doc["velocity_ref"] = r.velocity_ref;
  doc["velocity_pid"] = r.velocity_pid;
  doc["accel"] = r.energy.acceleration;
  doc["grade"] = r.grade;
  doc["p_wheels"] = r.energy.p_wheels;
  doc["p_motor"] = r.energy.p_motor;
  doc["p_batt"] = r.energy.p_batt;
  doc["energy_wh"] = r.energy.energy_wh;
  doc["soc"] = r.energy.soc;
  json limits = json::array();
  for (const auto& p : r.reference) limits.push_back(static_cast<int>(p.limit_type));
  doc["limit_type"] = std::move(limits);
  json ann = json::array();
  for (const auto& a : r.annotations) {
    ann.push_back({{"kind", a.kind}, {"distance_m", a.distance_m}, {"value", a.value}, {"label", a.label}});
  }
  doc["annotations"] = std::move(ann);
  json windows = json::array();
  for (const auto& w : r.windows) {
    windows.push_back({{"origin", w.origin}, {"retained", w.retained}, {"written", w.written}});
  }
  doc["inference_windows"] = std::move(windows);
  doc["diagnostics"] = {{"defaults_applied", r.defaults_applied}, {"notes", r.notes}};
  return doc;
}

std::string serialize_result(const EstimateResult& result) { return result_to_json(result).dump(); }

void export_result(const EstimateResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open output file: " + path.string());
  out << serialize_result(result) << '\n';
  out.flush();
  if (!out) throw Error("failed writing output file: " + path.string());
}

EstimateDocument parse_estimate_document(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(std::string("estimate document: malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("schema", "") != kResultSchema) throw Error("estimate document: wrong schema");
  EstimateDocument out;
  try {
    out.steps = doc.at("route").at("steps").get<std::size_t>();
    out.summary = doc.at("summary");
    for (const auto& a : doc.at("annotations")) {
      out.annotations.push_back({a.at("kind").get<std::string>(), a.at("distance_m").get<double>(),
                                 a.at("value").get<double>(), a.value("label", std::string())});
    }
  } catch (const json::exception& e) {
    throw Error(std::string("estimate document: ") + e.what());
  }
  for (const auto& name : result_series_names()) {
    auto series = require_series(doc, name);
    if (series.size() != out.steps) throw Error("estimate document: series '" + name + "' has the wrong length");
    out.series.emplace(name, std::move(series));
  }
  return out;
}

}  // namespace bevroute
