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

#include "bevroute/route_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "bevroute/error.hpp"

namespace bevroute {

namespace {

using nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double wrap_heading(double deg) noexcept {
  double h = std::fmod(deg, 360.0);
  if (h < 0.0) h += 360.0;
  // fmod can return 360 after the correction for tiny negative inputs
  return h >= 360.0 ? 0.0 : h;
}

const json* find_linestring(const json& node) {
  if (!node.is_object()) return nullptr;
  const auto type = node.find("type");
  if (type == node.end() || !type->is_string()) return nullptr;
  const auto& t = type->get_ref<const std::string&>();
  if (t == "LineString") return &node;
  if (t == "Feature") {
    const auto geom = node.find("geometry");
    return geom == node.end() ? nullptr : find_linestring(*geom);
  }
  if (t == "FeatureCollection") {
    const auto features = node.find("features");
    if (features == node.end() || !features->is_array()) return nullptr;
    for (const auto& f : *features) {
      if (const json* ls = find_linestring(f)) return ls;
    }
  }
  if (t == "GeometryCollection") {
    const auto geoms = node.find("geometries");
    if (geoms == node.end() || !geoms->is_array()) return nullptr;
    for (const auto& g : *geoms) {
      if (const json* ls = find_linestring(g)) return ls;
    }
  }
  return nullptr;
}

double lerp(double a, double b, double f) noexcept { return a + (b - a) * f; }

}  // namespace

bool is_valid(const GeoPoint& p) noexcept {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

GeoPoint make_geo_point(double lat, double lon) {
  GeoPoint p{lat, lon};
  if (!is_valid(p)) {
    throw Error("coordinate out of range: (" + std::to_string(lat) + ", " + std::to_string(lon) + ")");
  }
  return p;
}

EdgeClass edge_class_from_string(std::string_view name) noexcept {
  static constexpr std::array<std::pair<std::string_view, EdgeClass>, 8> kNames{{
      {"motorway", EdgeClass::Motorway},
      {"trunk", EdgeClass::Trunk},
      {"primary", EdgeClass::Primary},
      {"secondary", EdgeClass::Secondary},
      {"tertiary", EdgeClass::Tertiary},
      {"unclassified", EdgeClass::Unclassified},
      {"residential", EdgeClass::Residential},
      {"service_other", EdgeClass::ServiceOther},
  }};
  for (const auto& [n, c] : kNames) {
    if (n == name) return c;
  }
  return EdgeClass::ServiceOther;
}

std::string_view to_string(EdgeClass c) noexcept {
  switch (c) {
    case EdgeClass::Motorway: return "motorway";
    case EdgeClass::Trunk: return "trunk";
    case EdgeClass::Primary: return "primary";
    case EdgeClass::Secondary: return "secondary";
    case EdgeClass::Tertiary: return "tertiary";
    case EdgeClass::Unclassified: return "unclassified";
    case EdgeClass::Residential: return "residential";
    case EdgeClass::ServiceOther: return "service_other";
  }
  return "service_other";
}

bool all_finite(const RoadFeatures& f) noexcept {
  return std::isfinite(f.speed_limit) && std::isfinite(f.avg_edge_speed) && std::isfinite(f.curvature) &&
         std::isfinite(f.grade) && std::isfinite(f.elevation) && std::isfinite(f.heading) &&
         std::isfinite(f.heading_change) && std::isfinite(f.edge_position);
}

double DiscretizedRoute::interval_after(std::size_t i) const noexcept {
  if (i + 1 >= steps.size()) return 0.0;
  return steps[i + 1].arc_length - steps[i].arc_length;
}

std::vector<double> DiscretizedRoute::arc_lengths() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.arc_length);
  return out;
}

std::vector<GeoPoint> parse_route_geojson(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(std::string("malformed GeoJSON: ") + e.what());
  }
  const json* line = find_linestring(doc);
  if (line == nullptr) throw Error("no LineString geometry in GeoJSON document");

  const auto coords = line->find("coordinates");
  if (coords == line->end() || !coords->is_array()) throw Error("LineString without coordinates array");

  std::vector<GeoPoint> points;
  points.reserve(coords->size());
  for (const auto& pos : *coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      throw Error("malformed GeoJSON position");
    }
    points.push_back(make_geo_point(pos[1].get<double>(), pos[0].get<double>()));
  }
  return points;
}

double haversine_distance(const GeoPoint& p, const GeoPoint& q) noexcept {
  const double phi1 = p.lat * kDegToRad;
  const double phi2 = q.lat * kDegToRad;
  const double dphi = (q.lat - p.lat) * kDegToRad;
  const double dlambda = (q.lon - p.lon) * kDegToRad;
  const double sp = std::sin(dphi / 2.0);
  const double sl = std::sin(dlambda / 2.0);
  const double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

double initial_bearing(const GeoPoint& p, const GeoPoint& q) noexcept {
  const double phi1 = p.lat * kDegToRad;
  const double phi2 = q.lat * kDegToRad;
  const double dlambda = (q.lon - p.lon) * kDegToRad;
  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  return wrap_heading(std::atan2(y, x) * kRadToDeg);
}

double heading_delta(double from, double to) noexcept {
  double d = std::fmod(to - from, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

DiscretizedRoute discretize_route(std::span<const GeoPoint> polyline) {
  // Drop repeated vertices so every segment has positive length.
  std::vector<GeoPoint> pts;
  std::vector<double> cum;
  for (const auto& p : polyline) {
    if (!is_valid(p)) throw Error("invalid coordinate in polyline");
    if (!pts.empty()) {
      const double d = haversine_distance(pts.back(), p);
      if (d <= 0.0) continue;
      cum.push_back(cum.back() + d);
    } else {
      cum.push_back(0.0);
    }
    pts.push_back(p);
  }
  if (pts.size() < 2 || cum.back() < 1.0) throw Error("degenerate polyline (total length below 1 m)");

  const double total = cum.back();
  constexpr double kTailEps = 1e-6;
  const auto whole = static_cast<std::size_t>(std::floor(total + kTailEps));

  std::vector<double> targets;
  targets.reserve(whole + 2);
  for (std::size_t i = 0; i <= whole; ++i) targets.push_back(static_cast<double>(i));
  if (total - static_cast<double>(whole) > kTailEps) targets.push_back(total);

  DiscretizedRoute route;
  route.steps.reserve(targets.size());
  std::size_t seg = 0;
  for (double t : targets) {
    while (seg + 2 < cum.size() && cum[seg + 1] < t) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double f = std::clamp((t - cum[seg]) / len, 0.0, 1.0);
    RouteStep step;
    step.position = {lerp(pts[seg].lat, pts[seg + 1].lat, f), lerp(pts[seg].lon, pts[seg + 1].lon, f)};
    step.arc_length = t;
    route.steps.push_back(step);
  }
  route.total_length = route.steps.back().arc_length;
  return route;
}

DiscretizedRoute attach_features(DiscretizedRoute route, std::span<const FeatureNode> nodes, double max_gap) {
  if (nodes.empty()) throw Error("empty feature list");
  if (route.steps.empty()) throw Error("route has no steps");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i].arc_length < nodes[i - 1].arc_length) throw Error("feature nodes not sorted by arc length");
    if (nodes[i].arc_length - nodes[i - 1].arc_length > max_gap) {
      throw Error("feature coverage gap of " + std::to_string(nodes[i].arc_length - nodes[i - 1].arc_length) +
                  " m exceeds limit");
    }
  }
  if (nodes.front().arc_length > max_gap || route.total_length - nodes.back().arc_length > max_gap) {
    throw Error("feature nodes do not cover the route");
  }

  std::size_t k = 0;
  for (auto& step : route.steps) {
    const double x = step.arc_length;
    while (k + 1 < nodes.size() && nodes[k + 1].arc_length <= x) ++k;

    if (k + 1 >= nodes.size() || x <= nodes[k].arc_length) {
      // Before the first node, after the last, or exactly on one.
      step.features = nodes[k].features;
      continue;
    }
    const auto& lo = nodes[k];
    const auto& hi = nodes[k + 1];
    const double span = hi.arc_length - lo.arc_length;
    const double f = span > 0.0 ? (x - lo.arc_length) / span : 0.0;

    RoadFeatures out = (f <= 0.5) ? lo.features : hi.features;
    const auto& a = lo.features;
    const auto& b = hi.features;
    out.elevation = lerp(a.elevation, b.elevation, f);
    out.grade = lerp(a.grade, b.grade, f);
    out.speed_limit = lerp(a.speed_limit, b.speed_limit, f);
    out.avg_edge_speed = lerp(a.avg_edge_speed, b.avg_edge_speed, f);
    out.curvature = lerp(a.curvature, b.curvature, f);
    out.heading = wrap_heading(a.heading + f * heading_delta(a.heading, b.heading));
    step.features = out;
  }
  route.has_features = true;
  return route;
}

VehicleStates resample_trace_to_meters(const SimTrace& trace, const DiscretizedRoute& route) {
  if (trace.samples.empty()) throw Error("empty simulation trace");
  constexpr double kTol = 1e-6;
  if (trace.samples.back().s + kTol < route.total_length) {
    throw Error("trace covers " + std::to_string(trace.samples.back().s) + " m of a " +
                std::to_string(route.total_length) + " m route");
  }
  const auto& smp = trace.samples;
  VehicleStates out;
  out.velocity.reserve(route.size());
  out.acceleration.reserve(route.size());

  std::size_t i = 0;
  for (const auto& step : route.steps) {
    const double x = step.arc_length;
    // First sample at or beyond x; samples are non-decreasing in s.
    while (i < smp.size() && smp[i].s < x) ++i;
    if (i == 0 || i == smp.size()) {
      const auto& s = smp[std::min(i, smp.size() - 1)];
      out.velocity.push_back(s.v);
      out.acceleration.push_back(s.a);
      continue;
    }
    const auto& lo = smp[i - 1];
    const auto& hi = smp[i];
    const double ds = hi.s - lo.s;
    const double f = ds > 0.0 ? (x - lo.s) / ds : 1.0;
    out.velocity.push_back(lerp(lo.v, hi.v, f));
    out.acceleration.push_back(lerp(lo.a, hi.a, f));
  }
  return out;
}

}  // namespace bevroute
