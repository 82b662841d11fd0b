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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "bevroute/error.hpp"
#include "bevroute/route_model.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace bevroute {
namespace {

constexpr double kDegPerM = 180.0 / (std::numbers::pi * kEarthRadiusM);

TEST(ParseRouteGeojson, SwapsCoordinateOrder) {
  const auto pts = parse_route_geojson(R"({"type":"LineString","coordinates":[[-83.05,42.33],[-83.04,42.33]]})");
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_DOUBLE_EQ(pts[0].lat, 42.33);
  EXPECT_DOUBLE_EQ(pts[0].lon, -83.05);
  EXPECT_DOUBLE_EQ(pts[1].lon, -83.04);
}

TEST(ParseRouteGeojson, PointOnlyDocumentIsRejected) {
  try {
    parse_route_geojson(R"({"type":"Point","coordinates":[-83.05,42.33]})");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no LineString"), std::string::npos);
  }
}

TEST(ParseRouteGeojson, MalformedDocumentIsRejected) {
  EXPECT_THROW(parse_route_geojson("{\"type\": "), Error);
  EXPECT_THROW(parse_route_geojson(R"({"type":"LineString","coordinates":[[-83.05,142.0],[-83.0,42.0]]})"), Error);
}

TEST(ParseRouteGeojson, ThreeVertexFixtureMatchesFile) {
  const auto text = testing::read_text(testing::fixture_path("three_vertex.geojson"));
  const auto raw = nlohmann::json::parse(text).at("coordinates");
  const auto pts = parse_route_geojson(text);
  ASSERT_EQ(pts.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(pts[i].lon, raw[i][0].get<double>());
    EXPECT_EQ(pts[i].lat, raw[i][1].get<double>());
  }
}

TEST(ParseRouteGeojson, FindsLineStringInsideFeatureCollection) {
  const auto pts = parse_route_geojson(testing::read_text(testing::fixture_path("urban_route.geojson")));
  EXPECT_GT(pts.size(), 10u);
}

TEST(Haversine, IdentityAndDegreeOfLongitude) {
  const auto p = make_geo_point(42.0, -83.0);
  EXPECT_EQ(haversine_distance(p, p), 0.0);
  EXPECT_NEAR(haversine_distance(make_geo_point(0, 0), make_geo_point(0, 1)), 111194.9, 0.1);
}

TEST(Haversine, Symmetric) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lat(-80, 80), lon(-179, 179);
  for (int i = 0; i < 100; ++i) {
    const auto p = make_geo_point(lat(rng), lon(rng));
    const auto q = make_geo_point(lat(rng), lon(rng));
    EXPECT_DOUBLE_EQ(haversine_distance(p, q), haversine_distance(q, p));
  }
}

TEST(HeadingDelta, WrapsAroundNorth) {
  EXPECT_DOUBLE_EQ(heading_delta(350.0, 10.0), 20.0);
  EXPECT_DOUBLE_EQ(heading_delta(10.0, 350.0), -20.0);
  EXPECT_DOUBLE_EQ(heading_delta(0.0, 180.0), 180.0);
}

TEST(DiscretizeRoute, StraightTenMetres) {
  const auto route = testing::straight_route(10.0);
  ASSERT_EQ(route.size(), 11u);
  for (std::size_t i = 0; i < route.size(); ++i) EXPECT_NEAR(route.steps[i].arc_length, double(i), 1e-6);
  EXPECT_NEAR(route.total_length, 10.0, 1e-6);
}

TEST(DiscretizeRoute, CoincidentPointsAreDegenerate) {
  const std::vector<GeoPoint> line{make_geo_point(42, -83), make_geo_point(42, -83)};
  try {
    discretize_route(line);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate polyline"), std::string::npos);
  }
}

TEST(DiscretizeRoute, LShapePutsStepThreeOnTheCorner) {
  // 3 m north then 4 m east near the equator.
  const auto a = make_geo_point(0.0, 0.0);
  const auto b = make_geo_point(3.0 * kDegPerM, 0.0);
  const auto c = make_geo_point(3.0 * kDegPerM, 4.0 * kDegPerM / std::cos(3.0 * kDegPerM * std::numbers::pi / 180.0));
  const std::vector<GeoPoint> line{a, b, c};
  const auto route = discretize_route(line);
  ASSERT_EQ(route.size(), 8u);
  EXPECT_NEAR(route.steps[3].arc_length, 3.0, 1e-6);
  EXPECT_NEAR(haversine_distance(route.steps[3].position, b), 0.0, 1e-6);
  EXPECT_NEAR(route.total_length, 7.0, 1e-6);
}

TEST(DiscretizeRoute, FinalStepMayBeShorter) {
  const auto route = testing::straight_route(10.4);
  ASSERT_EQ(route.size(), 12u);
  EXPECT_NEAR(route.steps.back().arc_length, 10.4, 1e-6);
  EXPECT_NEAR(route.interval_after(10), 0.4, 1e-6);
  EXPECT_EQ(route.interval_after(11), 0.0);
}

TEST(AttachFeatures, ConstantFeaturesPropagate) {
  auto f = testing::plain_features(13.9);
  const auto route = testing::with_features(testing::straight_route(50.0), [&](double) { return f; });
  for (const auto& step : route.steps) EXPECT_EQ(step.features, f);
}

TEST(AttachFeatures, ElevationIsInterpolated) {
  auto f0 = testing::plain_features(10.0);
  auto f1 = f0;
  f0.elevation = 100.0;
  f1.elevation = 110.0;
  const std::vector<FeatureNode> nodes{{0.0, f0}, {10.0, f1}};
  const auto route = attach_features(testing::straight_route(10.0), nodes);
  EXPECT_NEAR(route.steps[5].features.elevation, 105.0, 1e-9);
}

TEST(AttachFeatures, HeadingIsInterpolatedOnTheCircle) {
  auto f0 = testing::plain_features(10.0);
  auto f1 = f0;
  f0.heading = 350.0;
  f1.heading = 10.0;
  const std::vector<FeatureNode> nodes{{0.0, f0}, {10.0, f1}};
  const auto route = attach_features(testing::straight_route(10.0), nodes);
  const double mid = route.steps[5].features.heading;
  EXPECT_NEAR(std::min(mid, 360.0 - mid), 0.0, 1e-9);
}

TEST(AttachFeatures, RejectsGapsAndUncoveredEnds) {
  const auto f = testing::plain_features(10.0);
  EXPECT_THROW(attach_features(testing::straight_route(100.0), std::vector<FeatureNode>{{0.0, f}, {100.0, f}}), Error);
  EXPECT_THROW(attach_features(testing::straight_route(100.0), std::vector<FeatureNode>{{0.0, f}, {40.0, f}}), Error);
  EXPECT_THROW(attach_features(testing::straight_route(40.0), std::vector<FeatureNode>{}), Error);
}

SimTrace linear_trace(double length, double v0, double v1, double ds) {
  SimTrace trace;
  double t = 0.0;
  for (double s = 0.0; s <= length + 1e-9; s += ds) {
    const double v = v0 + (v1 - v0) * s / length;
    trace.samples.push_back({t, s, v, 0.5, 0.0, v});
    t += 0.01;
  }
  return trace;
}

TEST(ResampleTrace, ConstantVelocity) {
  const auto route = testing::straight_route(100.0);
  const auto out = resample_trace_to_meters(linear_trace(100.0, 10.0, 10.0, 0.1), route);
  ASSERT_EQ(out.velocity.size(), route.size());
  for (double v : out.velocity) EXPECT_NEAR(v, 10.0, 1e-9);
}

TEST(ResampleTrace, LinearVelocityMidpoint) {
  const auto route = testing::straight_route(100.0);
  const auto out = resample_trace_to_meters(linear_trace(100.0, 0.0, 20.0, 0.1), route);
  EXPECT_NEAR(out.velocity[50], 10.0, 1e-6);
}

TEST(ResampleTrace, MatchesScalarInterpolationOracle) {
  SimTrace trace;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> step(0.05, 0.7), vel(0.0, 20.0), acc(-3.0, 2.0);
  double s = 0.0;
  while (s < 60.0) {
    trace.samples.push_back({s, s, vel(rng), acc(rng), 0.0, 0.0});
    s += step(rng);
  }
  trace.samples.push_back({s, s, vel(rng), acc(rng), 0.0, 0.0});
  std::vector<double> xs, vs, as;
  for (const auto& p : trace.samples) {
    xs.push_back(p.s);
    vs.push_back(p.v);
    as.push_back(p.a);
  }
  const auto route = testing::straight_route(60.0);
  const auto out = resample_trace_to_meters(trace, route);
  for (std::size_t i = 0; i < route.size(); ++i) {
    const double x = route.steps[i].arc_length;
    EXPECT_NEAR(out.velocity[i], oracle::interpolate(xs, vs, x), 1e-9) << "step " << i;
    EXPECT_NEAR(out.acceleration[i], oracle::interpolate(xs, as, x), 1e-9) << "step " << i;
  }
}

TEST(ResampleTrace, ShortTraceIsRejected) {
  EXPECT_THROW(resample_trace_to_meters(linear_trace(50.0, 10.0, 10.0, 0.1), testing::straight_route(100.0)), Error);
}

}  // namespace
}  // namespace bevroute
