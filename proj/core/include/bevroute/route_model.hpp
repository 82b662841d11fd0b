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
#include <span>
#include <string_view>
#include <vector>

#include "bevroute/sim_trace.hpp"

namespace bevroute {

inline constexpr double kEarthRadiusM = 6371000.0;

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

bool is_valid(const GeoPoint& p) noexcept;

// Throws bevroute::Error when the coordinates are non-finite or out of range.
GeoPoint make_geo_point(double lat, double lon);

enum class EdgeClass : int {
  Motorway = 0,
  Trunk = 1,
  Primary = 2,
  Secondary = 3,
  Tertiary = 4,
  Unclassified = 5,
  Residential = 6,
  ServiceOther = 7,
};

// Accepts Valhalla/OSM road class names ("motorway", "trunk", ...). Unknown
// names map to ServiceOther.
EdgeClass edge_class_from_string(std::string_view name) noexcept;
std::string_view to_string(EdgeClass c) noexcept;

// Per-location road attributes. Speeds are in m/s, grade in percent.
struct RoadFeatures {
  double speed_limit = 0.0;
  double avg_edge_speed = 0.0;
  double curvature = 0.0;       // heading change in degrees per 10 m of travel
  double grade = 0.0;           // percent, signed
  double elevation = 0.0;       // m
  double heading = 0.0;         // degrees in [0, 360)
  double heading_change = 0.0;  // degrees, >= 0
  double edge_position = 0.5;   // fraction along the matched edge
  bool traffic_signal = false;
  bool stop_sign = false;
  bool yield_sign = false;
  bool roundabout = false;
  bool link = false;
  EdgeClass edge_class = EdgeClass::ServiceOther;

  friend bool operator==(const RoadFeatures&, const RoadFeatures&) = default;
};

bool all_finite(const RoadFeatures& f) noexcept;

struct RouteStep {
  GeoPoint position;
  double arc_length = 0.0;  // m from route start
  RoadFeatures features;
};

// A route resampled at 1 m arc-length spacing. The final step may be closer
// than 1 m to its predecessor.
struct DiscretizedRoute {
  std::vector<RouteStep> steps;
  double total_length = 0.0;
  bool has_features = false;

  std::size_t size() const noexcept { return steps.size(); }

  // Length of the interval that starts at step i; zero for the final step.
  double interval_after(std::size_t i) const noexcept;

  std::vector<double> arc_lengths() const;
};

// Road features known at a given arc length, e.g. one per map-matched node.
struct FeatureNode {
  double arc_length = 0.0;
  RoadFeatures features;
};

// Per-meter vehicle state sampled from a simulation trace.
struct VehicleStates {
  std::vector<double> velocity;      // m/s
  std::vector<double> acceleration;  // m/s^2
};

// Returns the coordinates of the first LineString found in a GeoJSON
// FeatureCollection, Feature or bare geometry. GeoJSON positions are
// [lon, lat]; the result is (lat, lon).
std::vector<GeoPoint> parse_route_geojson(std::string_view document);

double haversine_distance(const GeoPoint& p, const GeoPoint& q) noexcept;

// Initial great-circle bearing from p to q in degrees [0, 360).
double initial_bearing(const GeoPoint& p, const GeoPoint& q) noexcept;

// Signed smallest rotation from heading `from` to heading `to`, in (-180, 180].
double heading_delta(double from, double to) noexcept;

DiscretizedRoute discretize_route(std::span<const GeoPoint> polyline);

inline constexpr double kDefaultMaxFeatureGap = 50.0;

// Interpolates per-node features onto every route step. Continuous fields are
// linear in arc length (heading along the shorter arc); flags, edge class,
// edge position and heading change come from the nearest node.
DiscretizedRoute attach_features(DiscretizedRoute route, std::span<const FeatureNode> nodes,
                                 double max_gap = kDefaultMaxFeatureGap);

// Samples trace velocity and acceleration at each route step by linear
// interpolation in travelled distance.
VehicleStates resample_trace_to_meters(const SimTrace& trace, const DiscretizedRoute& route);

}  // namespace bevroute
