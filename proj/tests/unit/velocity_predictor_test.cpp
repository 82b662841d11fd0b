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
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "bevroute/error.hpp"
#include "bevroute/velocity_predictor.hpp"
#include "bevroute/weights_io.hpp"
#include "bevroute/zero_phase_filter.hpp"
#include "test_support.hpp"

namespace bevroute {
namespace {

DiscretizedRoute featured(double length) {
  return testing::with_features(testing::straight_route(length), [](double s) {
    auto f = testing::plain_features(13.9);
    f.elevation = 250.0 + 0.01 * s;
    return f;
  });
}

VehicleStates cruise(std::size_t n, double v) { return {std::vector<double>(n, v), std::vector<double>(n, 0.0)}; }

TEST(WindowCount, Arithmetic) {
  const ModelDims d;
  EXPECT_EQ(window_count(61, d), 1u);
  EXPECT_EQ(window_count(146, d), 10u);
  EXPECT_EQ(window_count(51, d), 0u);
}

TEST(BatchInference, OneWindowForMinimalRoute) {
  const auto route = featured(60.0);
  const auto model = make_synthetic_model({}, default_feature_layout(), 7);
  const auto out = batch_inference(route, cruise(route.size(), 10.0), {}, model);
  ASSERT_EQ(out.windows.size(), 1u);
  EXPECT_EQ(out.windows[0].written, 10u);
  EXPECT_EQ(out.velocity.size(), route.size());
}

TEST(BatchInference, TenWindowsWithClippedTail) {
  const auto route = featured(145.0);
  const auto model = make_synthetic_model({}, default_feature_layout(), 7);
  const auto out = batch_inference(route, cruise(route.size(), 10.0), {}, model);
  ASSERT_EQ(out.windows.size(), 10u);
  for (std::size_t w = 0; w < 10; ++w) {
    EXPECT_EQ(out.windows[w].origin, 50 + 10 * w);
    EXPECT_EQ(out.windows[w].retained, 10u);
  }
  EXPECT_EQ(out.windows.back().written, 5u);
  EXPECT_EQ(out.velocity.size(), route.size());
}

TEST(BatchInference, ZeroModelPredictsScalerMean) {
  const auto route = featured(145.0);
  const auto model = make_synthetic_model({}, default_feature_layout(), 7, 0.0);
  const double mu = model.scaler.at("velocity").mean;
  auto past = cruise(route.size(), 3.0);
  const auto out = batch_inference(route, past, {}, model);
  for (std::size_t i = 0; i <= 50; ++i) EXPECT_EQ(out.velocity[i], 3.0);
  for (std::size_t i = 51; i < route.size(); ++i) EXPECT_NEAR(out.velocity[i], mu, 1e-12);
}

TEST(BatchInference, DeterministicAcrossThreadCounts) {
  const auto route = featured(200.0);
  const auto model = make_synthetic_model({}, default_feature_layout(), 11);
  InferenceOptions one;
  one.threads = 1;
  InferenceOptions many;
  many.threads = 4;
  const auto a = batch_inference(route, cruise(route.size(), 9.0), {}, model, one);
  const auto b = batch_inference(route, cruise(route.size(), 9.0), {}, model, many);
  EXPECT_EQ(a.velocity, b.velocity);
}

TEST(BatchInference, ClosedLoopRunsAndDiffersFromOpenLoop) {
  const auto route = featured(200.0);
  const auto model = make_synthetic_model({}, default_feature_layout(), 11, 0.3);
  InferenceOptions closed;
  closed.closed_loop = true;
  const auto a = batch_inference(route, cruise(route.size(), 9.0), {}, model);
  const auto b = batch_inference(route, cruise(route.size(), 9.0), {}, model, closed);
  EXPECT_EQ(a.windows.size(), b.windows.size());
  EXPECT_NE(a.velocity, b.velocity);
}

TEST(BatchInference, ShortRouteIsRejected) {
  const auto route = featured(55.0);
  const auto model = make_synthetic_model({}, default_feature_layout(), 7);
  EXPECT_THROW(batch_inference(route, cruise(route.size(), 10.0), {}, model), Error);
}

TEST(RoadFeatureMatrix, StopIndicators) {
  const auto route = featured(100.0);
  const std::vector<std::string> names{"approaching_stop", "departing_stop", "edge_class"};
  const std::vector<double> stops{50.0};
  const Matrix m = build_road_feature_matrix(route, names, stops, 20.0);
  EXPECT_EQ(m(29, 0), 0.0);
  EXPECT_EQ(m(30, 0), 1.0);
  EXPECT_EQ(m(50, 0), 1.0);
  EXPECT_EQ(m(51, 0), 0.0);
  EXPECT_EQ(m(51, 1), 1.0);
  EXPECT_EQ(m(70, 1), 1.0);
  EXPECT_EQ(m(71, 1), 0.0);
  EXPECT_EQ(m(0, 2), double(static_cast<int>(EdgeClass::Secondary)));
  const std::vector<std::string> bad{"mystery"};
  EXPECT_THROW(build_road_feature_matrix(route, bad, stops, 20.0), Error);
}

TEST(ZeroPhaseFilter, ConstantSignalPassesUnchanged) {
  const std::vector<double> x(40, 7.25);
  const auto y = zero_phase_filter(x);
  ASSERT_EQ(y.size(), x.size());
  for (double v : y) EXPECT_NEAR(v, 7.25, 1e-9);
}

TEST(ZeroPhaseFilter, SymmetricPulseStaysCentred) {
  std::vector<double> x(201, 0.0);
  for (int i = 95; i <= 105; ++i) x[i] = 1.0;
  const auto y = zero_phase_filter(x);
  const auto peak = std::max_element(y.begin(), y.end()) - y.begin();
  EXPECT_EQ(peak, 100);
  for (int k = 1; k < 60; ++k) EXPECT_NEAR(y[100 - k], y[100 + k], 1e-6);
}

TEST(ZeroPhaseFilter, ReducesNoiseVariance) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(500);
  for (double& v : x) v = n(rng);
  const auto y = zero_phase_filter(x);
  auto var = [](const std::vector<double>& s) {
    const double m = std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
    double acc = 0.0;
    for (double v : s) acc += (v - m) * (v - m);
    return acc / double(s.size());
  };
  EXPECT_LT(var(y), var(x));
}

TEST(ZeroPhaseFilter, Preconditions) {
  EXPECT_THROW(zero_phase_filter(std::vector<double>{1, 2, 3}), Error);
  EXPECT_NO_THROW(zero_phase_filter(std::vector<double>{1, 2, 3, 4}));
  EXPECT_THROW(zero_phase_filter(std::vector<double>(10, 1.0), FilterConfig{1.0}), Error);
}

TEST(Butterworth, DcGainIsOne) {
  const auto c = butterworth_first_order(0.05);
  EXPECT_NEAR((c.b0 + c.b1) / (1.0 + c.a1), 1.0, 1e-12);
}

}  // namespace
}  // namespace bevroute
