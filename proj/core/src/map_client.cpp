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

#include "bevroute/map_client.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "bevroute/error.hpp"

namespace bevroute {

namespace {

using nlohmann::json;

constexpr double kKmhToMs = 1.0 / 3.6;

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.origin = url;
  } else {
    out.origin = url.substr(0, path_start);
    out.prefix = url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  return out;
}

void flatten_into(const json& node, const std::string& prefix, json& out) {
  for (const auto& [key, value] : node.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten_into(value, name, out);
    } else {
      out[name] = value;
    }
  }
}

struct BatchOutcome {
  std::vector<RawAttributeRecord> records;
  std::size_t requests = 0;
  std::size_t primary_failures = 0;
  bool used_fallback = false;
  std::vector<std::string> notes;
};

BatchOutcome run_batch(std::span<const GeoPoint> points, AttributeService service, const EndpointConfig& cfg,
                       std::size_t batch_index) {
  BatchOutcome outcome;
  const std::string body = build_request_body(points, service).dump();
  const auto seconds = static_cast<time_t>(cfg.timeout_s);
  const auto micros = static_cast<time_t>((cfg.timeout_s - static_cast<double>(seconds)) * 1e6);

  std::string last_error;
  const std::string* urls[] = {&cfg.primary_base_url, &cfg.fallback_base_url};
  for (int which = 0; which < 2; ++which) {
    const auto url = split_url(*urls[which]);
    httplib::Client client(url.origin);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    const std::string path = url.prefix + std::string(endpoint_path(service));

    for (int attempt = 0; attempt <= cfg.retry_count; ++attempt) {
      ++outcome.requests;
      auto res = client.Post(path, body, "application/json");
      std::string failure;
      if (!res) {
        failure = "transport error: " + httplib::to_string(res.error());
      } else if (res->status < 200 || res->status >= 300) {
        failure = "HTTP " + std::to_string(res->status);
      } else {
        json parsed;
        try {
          parsed = json::parse(res->body);
        } catch (const json::parse_error& e) {
          throw Error(std::string("unparseable response from ") + *urls[which] + ": " + e.what());
        }
        outcome.records = decode_response(parsed, points, service);
        outcome.used_fallback = which == 1;
        if (outcome.used_fallback) {
          outcome.notes.push_back("batch " + std::to_string(batch_index) + " served by fallback " +
                                  cfg.fallback_base_url);
        }
        return outcome;
      }
      if (which == 0) ++outcome.primary_failures;
      last_error = *urls[which] + " attempt " + std::to_string(attempt + 1) + ": " + failure;
      outcome.notes.push_back("batch " + std::to_string(batch_index) + " " + last_error);
    }
  }
  throw Error("map service unreachable for " + std::string(endpoint_path(service)) + " (" + last_error + ")");
}

std::optional<double> number_at(const json& attrs, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    const auto it = attrs.find(k);
    if (it != attrs.end() && it->is_number()) {
      const double v = it->get<double>();
      if (std::isfinite(v)) return v;
    }
  }
  return std::nullopt;
}

std::optional<bool> flag_at(const json& attrs, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    const auto it = attrs.find(k);
    if (it == attrs.end()) continue;
    if (it->is_boolean()) return it->get<bool>();
    if (it->is_number()) return it->get<double>() != 0.0;
  }
  return std::nullopt;
}

std::optional<std::string> string_at(const json& attrs, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    const auto it = attrs.find(k);
    if (it != attrs.end() && it->is_string()) return it->get<std::string>();
  }
  return std::nullopt;
}

// Looks a value up in each source in order.
template <typename Getter>
auto first_of(std::initializer_list<const RawAttributeRecord*> sources, Getter get)
    -> decltype(get(sources.begin()[0]->attributes)) {
  for (const auto* src : sources) {
    if (src == nullptr) continue;
    if (auto v = get(src->attributes)) return v;
  }
  return std::nullopt;
}

double wrap360(double deg) {
  double h = std::fmod(deg, 360.0);
  if (h < 0.0) h += 360.0;
  return h >= 360.0 ? 0.0 : h;
}

}  // namespace

void EndpointConfig::validate() const {
  if (primary_base_url.empty() || fallback_base_url.empty()) throw Error("endpoint URLs must be non-empty");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (max_parallel_requests < 1) throw Error("max_parallel_requests must be >= 1");
  if (!(timeout_s > 0.0)) throw Error("timeout must be positive");
  if (retry_count < 0) throw Error("retry_count must be >= 0");
}

EndpointConfig apply_env_overrides(EndpointConfig cfg) {
  if (const char* v = std::getenv(kPrimaryUrlEnv); v != nullptr && *v != '\0') cfg.primary_base_url = v;
  if (const char* v = std::getenv(kFallbackUrlEnv); v != nullptr && *v != '\0') cfg.fallback_base_url = v;
  return cfg;
}

std::string_view endpoint_path(AttributeService service) noexcept {
  switch (service) {
    case AttributeService::Locate: return "/locate";
    case AttributeService::TraceAttributes: return "/trace_attributes";
    case AttributeService::Height: return "/height";
  }
  return "/locate";
}

json flatten_json(const json& object) {
  json out = json::object();
  if (object.is_object()) flatten_into(object, "", out);
  return out;
}

json build_request_body(std::span<const GeoPoint> points, AttributeService service) {
  json shape = json::array();
  for (const auto& p : points) shape.push_back({{"lat", p.lat}, {"lon", p.lon}});
  switch (service) {
    case AttributeService::Locate:
      return {{"locations", shape}, {"costing", "auto"}, {"verbose", true}};
    case AttributeService::TraceAttributes:
      return {{"shape", shape}, {"costing", "auto"}, {"shape_match", "map_snap"}};
    case AttributeService::Height:
      return {{"shape", shape}, {"range", false}};
  }
  return json::object();
}

std::vector<RawAttributeRecord> decode_response(const json& response, std::span<const GeoPoint> points,
                                                AttributeService service) {
  std::vector<RawAttributeRecord> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i].lat = points[i].lat;
    out[i].lon = points[i].lon;
  }
  switch (service) {
    case AttributeService::Height: {
      const auto it = response.find("height");
      if (it == response.end() || !it->is_array() || it->size() != points.size()) {
        throw Error("height response does not match request size");
      }
      for (std::size_t i = 0; i < points.size(); ++i) {
        if ((*it)[i].is_number()) out[i].attributes["height"] = (*it)[i];
      }
      break;
    }
    case AttributeService::TraceAttributes: {
      const auto mp = response.find("matched_points");
      const auto edges = response.find("edges");
      if (mp == response.end() || !mp->is_array() || mp->size() != points.size()) {
        throw Error("trace_attributes response does not match request size");
      }
      for (std::size_t i = 0; i < points.size(); ++i) {
        json attrs = flatten_json((*mp)[i]);
        const auto idx = (*mp)[i].find("edge_index");
        if (idx != (*mp)[i].end() && idx->is_number_integer() && idx->get<long long>() >= 0 && edges != response.end() && edges->is_array() &&
            idx->get<std::size_t>() < edges->size()) {
          attrs.update(flatten_json((*edges)[idx->get<std::size_t>()]));
        }
        out[i].attributes = std::move(attrs);
      }
      break;
    }
    case AttributeService::Locate: {
      if (!response.is_array() || response.size() != points.size()) {
        throw Error("locate response does not match request size");
      }
      for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& loc = response[i];
        json attrs = json::object();
        if (const auto e = loc.find("edges"); e != loc.end() && e->is_array() && !e->empty()) {
          attrs.update(flatten_json((*e)[0]));
        }
        if (const auto n = loc.find("nodes"); n != loc.end() && n->is_array() && !n->empty()) {
          json node;
          node["node"] = (*n)[0];
          attrs.update(flatten_json(node));
        }
        out[i].attributes = std::move(attrs);
      }
      break;
    }
  }
  return out;
}

FetchResult fetch_attributes(std::span<const GeoPoint> points, AttributeService service, const EndpointConfig& cfg) {
  cfg.validate();
  if (points.empty()) throw Error("no points to fetch");

  const std::size_t n_batches = (points.size() + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<BatchOutcome> outcomes(n_batches);
  std::vector<std::exception_ptr> errors(n_batches);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t b = next++; b < n_batches; b = next++) {
      const std::size_t begin = b * cfg.batch_size;
      const std::size_t count = std::min(cfg.batch_size, points.size() - begin);
      try {
        outcomes[b] = run_batch(points.subspan(begin, count), service, cfg, b);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t n_threads = std::min(cfg.max_parallel_requests, n_batches);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  FetchResult result;
  result.records.reserve(points.size());
  result.diagnostics.batches = n_batches;
  for (auto& o : outcomes) {
    std::move(o.records.begin(), o.records.end(), std::back_inserter(result.records));
    result.diagnostics.requests += o.requests;
    result.diagnostics.primary_failures += o.primary_failures;
    result.diagnostics.fallback_batches += o.used_fallback ? 1 : 0;
    std::move(o.notes.begin(), o.notes.end(), std::back_inserter(result.diagnostics.notes));
  }
  return result;
}

ValhallaClient::ValhallaClient(EndpointConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

FetchResult ValhallaClient::fetch(std::span<const GeoPoint> points, AttributeService service) const {
  return fetch_attributes(points, service, cfg_);
}

std::vector<RawAttributeRecord> parse_attribute_records(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(std::string("corrupt attribute fixture: ") + e.what());
  }
  if (!doc.is_array()) throw Error("corrupt attribute fixture: expected a JSON array");
  std::vector<RawAttributeRecord> records;
  records.reserve(doc.size());
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("lat") || !item.contains("lon") || !item["lat"].is_number() ||
        !item["lon"].is_number()) {
      throw Error("corrupt attribute fixture: record without lat/lon");
    }
    RawAttributeRecord r;
    const auto p = make_geo_point(item["lat"].get<double>(), item["lon"].get<double>());
    r.lat = p.lat;
    r.lon = p.lon;
    if (const auto a = item.find("attributes"); a != item.end()) {
      if (!a->is_object()) throw Error("corrupt attribute fixture: attributes must be an object");
      r.attributes = *a;
    }
    records.push_back(std::move(r));
  }
  return records;
}

FixtureProvider::FixtureProvider(const std::filesystem::path& path, double match_tolerance_m)
    : tolerance_(match_tolerance_m) {
  std::ifstream in(path);
  if (!in) throw Error("fixture not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  records_ = parse_attribute_records(buf.str());
  if (records_.empty()) throw Error("fixture contains no records: " + path.string());
}

FixtureProvider::FixtureProvider(std::vector<RawAttributeRecord> records, double match_tolerance_m)
    : records_(std::move(records)), tolerance_(match_tolerance_m) {
  if (records_.empty()) throw Error("fixture contains no records");
}

FetchResult FixtureProvider::fetch(std::span<const GeoPoint> points, AttributeService /*service*/) const {
  FetchResult result;
  result.records.reserve(points.size());
  for (const auto& p : points) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const double d = haversine_distance(p, {records_[i].lat, records_[i].lon});
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best_d > tolerance_) {
      throw Error("fixture has no record within " + std::to_string(tolerance_) + " m of (" + std::to_string(p.lat) +
                  ", " + std::to_string(p.lon) + ")");
    }
    result.records.push_back({p.lat, p.lon, records_[best].attributes});
  }
  return result;
}

MergedFeatures merge_attribute_responses(std::span<const RawAttributeRecord> locate,
                                         std::span<const RawAttributeRecord> trace,
                                         std::span<const RawAttributeRecord> height,
                                         std::span<const double> arc_lengths) {
  const std::size_t n = trace.size();
  if (n == 0) throw Error("no attribute records to merge");
  if ((!locate.empty() && locate.size() != n) || (!height.empty() && height.size() != n)) {
    throw Error("attribute source length mismatch");
  }
  if (!arc_lengths.empty() && arc_lengths.size() != n) throw Error("arc length count does not match records");

  MergedFeatures merged;
  auto& defaults = merged.defaults_applied;
  merged.nodes.resize(n);

  std::vector<double> arc(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!arc_lengths.empty()) {
      arc[i] = arc_lengths[i];
    } else if (i > 0) {
      arc[i] = arc[i - 1] + haversine_distance({trace[i - 1].lat, trace[i - 1].lon}, {trace[i].lat, trace[i].lon});
    }
  }

  std::vector<std::optional<double>> elevation(n);
  std::vector<std::optional<double>> speed_limit(n);
  std::vector<bool> heading_known(n, false);
  std::vector<bool> grade_known(n, false);
  std::vector<bool> curvature_known(n, false);

  for (std::size_t i = 0; i < n; ++i) {
    const auto* t = &trace[i];
    const auto* l = locate.empty() ? nullptr : &locate[i];
    const auto* h = height.empty() ? nullptr : &height[i];
    auto& f = merged.nodes[i].features;
    merged.nodes[i].arc_length = arc[i];

    elevation[i] = first_of({h, t, l}, [](const json& a) { return number_at(a, {"height", "elevation"}); });

    auto positive = [](std::optional<double> v) { return (v && *v > 0.0) ? v : std::nullopt; };
    const auto limit_kmh = positive(first_of(
        {t, l}, [](const json& a) { return number_at(a, {"speed_limit", "edge_info.speed_limit", "edge.speed_limit"}); }));
    const auto speed_kmh = positive(
        first_of({t, l}, [](const json& a) { return number_at(a, {"speed", "edge.speed", "avg_edge_speed"}); }));

    if (speed_kmh) f.avg_edge_speed = *speed_kmh * kKmhToMs;
    if (limit_kmh) {
      speed_limit[i] = *limit_kmh * kKmhToMs;
    } else if (speed_kmh) {
      speed_limit[i] = f.avg_edge_speed;
      ++defaults["speed_limit"];
    }
    if (!speed_kmh && speed_limit[i]) {
      f.avg_edge_speed = *speed_limit[i];
      ++defaults["avg_edge_speed"];
    }

    if (const auto c = first_of({t, l}, [](const json& a) { return number_at(a, {"curvature", "edge.curvature"}); })) {
      f.curvature = std::max(0.0, *c);
      curvature_known[i] = true;
    }
    if (const auto g = first_of(
            {t, l}, [](const json& a) { return number_at(a, {"weighted_grade", "grade", "edge.weighted_grade"}); })) {
      f.grade = *g;
      grade_known[i] = true;
    }

    const auto pos = first_of(
        {t, l}, [](const json& a) { return number_at(a, {"edge_position", "distance_along_edge", "percent_along"}); });
    if (pos) {
      f.edge_position = std::clamp(*pos, 0.0, 1.0);
    } else {
      f.edge_position = 0.5;
      ++defaults["edge_position"];
    }

    if (const auto hd = first_of({t, l}, [](const json& a) { return number_at(a, {"heading"}); })) {
      f.heading = wrap360(*hd);
      heading_known[i] = true;
    } else {
      const auto b0 = number_at(t->attributes, {"begin_heading"});
      const auto b1 = number_at(t->attributes, {"end_heading"});
      if (b0 && b1) {
        f.heading = wrap360(*b0 + f.edge_position * heading_delta(*b0, *b1));
        heading_known[i] = true;
      }
    }

    auto flag = [&](const char* name, std::initializer_list<const char*> keys) {
      for (const auto* src : {t, l}) {
        if (src == nullptr) continue;
        if (auto v = flag_at(src->attributes, keys)) return *v;
      }
      ++defaults[name];
      return false;
    };
    f.traffic_signal = flag("traffic_signal", {"traffic_signal", "node.traffic_signal"});
    f.stop_sign = flag("stop_sign", {"stop_sign", "node.stop_sign"});
    f.yield_sign = flag("yield_sign", {"yield_sign", "node.yield_sign"});
    f.roundabout = flag("roundabout", {"roundabout", "edge.roundabout"});

    if (const auto lk = first_of({t, l}, [](const json& a) { return flag_at(a, {"link", "edge.classification.link"}); })) {
      f.link = *lk;
    } else if (const auto use = first_of({t, l}, [](const json& a) { return string_at(a, {"use", "edge.use"}); })) {
      f.link = *use == "ramp" || *use == "turn_channel";
    } else {
      f.link = false;
      ++defaults["link"];
    }

    if (const auto rc = first_of({t, l}, [](const json& a) {
          return string_at(a, {"road_class", "edge.classification.classification", "classification"});
        })) {
      f.edge_class = edge_class_from_string(*rc);
    } else {
      f.edge_class = EdgeClass::ServiceOther;
      ++defaults["edge_class"];
    }
  }

  // Elevation: interpolate missing values from known neighbours.
  {
    std::vector<std::size_t> known;
    for (std::size_t i = 0; i < n; ++i) {
      if (elevation[i]) known.push_back(i);
    }
    if (known.empty()) {
      defaults["elevation"] += n;
      for (auto& node : merged.nodes) node.features.elevation = 0.0;
    } else {
      std::size_t k = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (elevation[i]) {
          merged.nodes[i].features.elevation = *elevation[i];
          continue;
        }
        ++defaults["elevation"];
        while (k + 1 < known.size() && known[k + 1] < i) ++k;
        const std::size_t lo = known[k];
        const std::size_t hi = (k + 1 < known.size()) ? known[k + 1] : known[k];
        if (i < lo || lo == hi) {
          merged.nodes[i].features.elevation = *elevation[i < lo ? lo : hi];
        } else {
          const double span = arc[hi] - arc[lo];
          const double w = span > 0.0 ? (arc[i] - arc[lo]) / span : 0.0;
          merged.nodes[i].features.elevation = *elevation[lo] + w * (*elevation[hi] - *elevation[lo]);
        }
      }
    }
  }

  // Speed limit: fill records with no speed information from the nearest
  // record that has one.
  {
    bool any = false;
    for (const auto& s : speed_limit) any = any || s.has_value();
    if (!any) throw Error("no speed information in map responses");
    for (std::size_t i = 0; i < n; ++i) {
      if (speed_limit[i]) {
        merged.nodes[i].features.speed_limit = *speed_limit[i];
        continue;
      }
      std::optional<double> fill;
      for (std::size_t d = 1; !fill; ++d) {
        if (i >= d && speed_limit[i - d]) fill = speed_limit[i - d];
        else if (i + d < n && speed_limit[i + d]) fill = speed_limit[i + d];
      }
      ++defaults["speed_limit"];
      ++defaults["avg_edge_speed"];
      merged.nodes[i].features.speed_limit = *fill;
      merged.nodes[i].features.avg_edge_speed = *fill;
    }
  }

  // Heading: bearing of the local route direction where the service gave none.
  for (std::size_t i = 0; i < n; ++i) {
    if (heading_known[i]) continue;
    ++defaults["heading"];
    if (n < 2) continue;
    const std::size_t a = (i + 1 < n) ? i : i - 1;
    merged.nodes[i].features.heading =
        initial_bearing({trace[a].lat, trace[a].lon}, {trace[a + 1].lat, trace[a + 1].lon});
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& f = merged.nodes[i].features;
    f.heading_change = i == 0 ? 0.0 : std::abs(heading_delta(merged.nodes[i - 1].features.heading, f.heading));
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& f = merged.nodes[i].features;
    if (!curvature_known[i]) {
      ++defaults["curvature"];
      const double ds = i == 0 ? 0.0 : arc[i] - arc[i - 1];
      f.curvature = ds > 0.0 ? f.heading_change / ds * 10.0 : 0.0;
    }
    if (!grade_known[i]) {
      ++defaults["grade"];
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = std::min(i + 1, n - 1);
      const double ds = arc[hi] - arc[lo];
      f.grade = ds > 0.0 ? 100.0 * (merged.nodes[hi].features.elevation - merged.nodes[lo].features.elevation) / ds
                         : 0.0;
    }
  }
  return merged;
}

}  // namespace bevroute
