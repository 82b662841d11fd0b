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

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "bevroute/error.hpp"
#include "bevroute/pid_sim.hpp"
#include "oracles.hpp"

namespace bevroute {
namespace {

std::vector<ReferencePoint> constant_profile(double length, double v_ref) {
  std::vector<ReferencePoint> out;
  for (int i = 0; i <= static_cast<int>(length); ++i) out.push_back({double(i), v_ref, LimitType::Default});
  return out;
}

TEST(Sat, Clamps) {
  EXPECT_EQ(sat(5, -4, 2), 2);
  EXPECT_EQ(sat(-7, -4, 2), -4);
  EXPECT_EQ(sat(1, -4, 2), 1);
  EXPECT_THROW(sat(0, 1, -1), Error);
}

TEST(DynamicsDerivative, EquilibriumAndNestedSaturation) {
  ControllerConfig cfg;
  auto d = dynamics_derivative({0, 10, 0, 0, 0}, 10, cfg);
  EXPECT_EQ(d.ds, 10);
  EXPECT_EQ(d.dv, 0);
  EXPECT_EQ(d.da, 0);
  EXPECT_EQ(d.dj, 0);

  cfg.k1 = 1.0;
  // k1 (v_c - v) = 10 clamps to a_max = 2; k2 * 2 = 4 stays inside the jerk band.
  d = dynamics_derivative({0, 0, 0, 0, 0}, 10, cfg);
  EXPECT_DOUBLE_EQ(d.dj, cfg.k3 * cfg.k2 * cfg.a_max);
  // k1 (v_c - v) = -20 clamps to a_min = -4; k2 * -4 = -8.
  d = dynamics_derivative({0, 20, 0, 0, 0}, 0, cfg);
  EXPECT_DOUBLE_EQ(d.dj, cfg.k3 * cfg.k2 * cfg.a_min);
}

TEST(EulerStep, AdvancesPositionAndKeepsEquilibrium) {
  ControllerConfig cfg;
  const auto next = euler_step({0, 10, 0, 0, 0}, 10, cfg);
  EXPECT_NEAR(next.s, 0.1, 1e-12);
  EXPECT_EQ(next.v, 10);
  EXPECT_EQ(next.a, 0);
  EXPECT_EQ(next.j, 0);
  EXPECT_NEAR(next.t, 0.01, 1e-12);
}

TEST(EulerStep, ClampsAtStandstill) {
  ControllerConfig cfg;
  const auto next = euler_step({0, 0.001, -3, -5, 0}, 0, cfg);
  EXPECT_EQ(next.v, 0);
  EXPECT_EQ(next.a, 0);
  EXPECT_EQ(next.j, 0);
}

TEST(EulerStep, HundredStepsMatchFineOracle) {
  ControllerConfig cfg;
  SimState st;
  for (int i = 0; i < 100; ++i) st = euler_step(st, 10, cfg);
  const auto fine = oracle::integrate_cascade({}, 10, cfg, 1.0, 1e-4);
  EXPECT_NEAR(st.v, fine.v, 0.01 * std::abs(fine.v));
}

TEST(StoppingLut, ZeroMonotoneAndConsistent) {
  ControllerConfig cfg;
  const auto lut = build_stopping_lut(cfg);
  EXPECT_EQ(lut(0.0), 0.0);
  EXPECT_TRUE(std::is_sorted(lut.distance().begin(), lut.distance().end()));
  EXPECT_GE(lut(20), lut(10));
  EXPECT_NEAR(lut(10.0), simulate_stop_distance(10.0, cfg), 1e-9);
  const double direct = simulate_stop_distance(13.27, cfg);
  EXPECT_NEAR(lut(13.27), direct, 0.05 * direct);
}

TEST(RequiredDecelDistance, StopAndCurve) {
  const StoppingLUT lut({0, 10, 30}, {0, 20, 60});
  EXPECT_DOUBLE_EQ(required_decel_distance(10, {0, 0, LimitType::Stop}, lut), 20);
  EXPECT_DOUBLE_EQ(required_decel_distance(30, {0, 15, LimitType::Curve}, lut), 30);
  EXPECT_DOUBLE_EQ(required_decel_distance(10, {0, 15, LimitType::Curve}, lut), 0);
}

TEST(CommandVelocity, Modes) {
  ControllerConfig cfg;
  const StoppingLUT lut({0, 10, 20}, {0, 30, 80});
  const ReferencePoint curve{100, 10, LimitType::Curve};
  const ReferencePoint stop{100, 0, LimitType::Stop};
  EXPECT_EQ(command_velocity({50, 10, 0, 0, 0}, TrackingMode::StopEvent, &stop, 13, lut, cfg), 0.0);
  EXPECT_EQ(command_velocity({50, 10, 0, 0, 0}, TrackingMode::StandardSpeedLimit, nullptr, 13, lut, cfg), 13.0);
  EXPECT_NEAR(command_velocity({-1e6, 20, 0, 0, 0}, TrackingMode::CurveSpeed, &curve, 13, lut, cfg), 10.0, 1e-3);
  // v = 20 gives s_r = LUT(20) (20 - 10) / 20 = 40; pick gap so k s_r / gap = 0.5.
  const double gap = 40.0;
  const double v_c = command_velocity({100 - gap, 20, 0, 0, 0}, TrackingMode::CurveSpeed, &curve, 13, lut, cfg);
  EXPECT_NEAR(v_c, 10 - 10 * std::tanh(0.5), 1e-9);
  EXPECT_NEAR(v_c, 5.38, 5e-3);
}

TEST(UpdateTrackingMode, HorizonAndTieBreak) {
  ControllerConfig cfg;
  const StoppingLUT lut({0, 10, 20}, {0, 30, 80});
  const SimState st{0, 10, 0, 0, 0};
  const std::vector<ReferencePoint> far{{500, 0, LimitType::Stop}};
  EXPECT_EQ(update_tracking_mode(st, far, lut, cfg).mode, TrackingMode::StandardSpeedLimit);
  const std::vector<ReferencePoint> near{{20, 0, LimitType::Stop}};
  const auto sel = update_tracking_mode(st, near, lut, cfg);
  EXPECT_EQ(sel.mode, TrackingMode::StopEvent);
  ASSERT_TRUE(sel.event.has_value());
  EXPECT_EQ(sel.event->arc_length, 20);
  const std::vector<ReferencePoint> tie{{5, 2, LimitType::Curve}, {5, 0, LimitType::Stop}};
  EXPECT_EQ(update_tracking_mode(st, tie, lut, cfg).mode, TrackingMode::StopEvent);
}

void expect_bounds(const SimTrace& trace, const ControllerConfig& cfg) {
  for (const auto& p : trace.samples) {
    ASSERT_GE(p.a, cfg.a_min - 1e-9);
    ASSERT_LE(p.a, cfg.a_max + 1e-9);
    ASSERT_GE(p.j, cfg.j_min - 1e-9);
    ASSERT_LE(p.j, cfg.j_max + 1e-9);
    ASSERT_GE(p.v, 0.0);
  }
}

TEST(Simulate, ConstantProfileConvergesWithinBounds) {
  ControllerConfig cfg;
  const auto trace = simulate(constant_profile(500, 13.9), cfg);
  expect_bounds(trace, cfg);
  EXPECT_NEAR(trace.samples.back().v, 13.9, 0.1);
  EXPECT_GE(trace.final_distance(), 500.0);
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    ASSERT_NEAR(trace.samples[i].t - trace.samples[i - 1].t, cfg.h, 1e-9);
    ASSERT_LE(trace.samples[i].v, 13.9 * 1.05);
  }
}

TEST(Simulate, HonoursStopAtThreeHundredMetres) {
  ControllerConfig cfg;
  auto profile = constant_profile(500, 13.9);
  profile[300] = {300, 0, LimitType::Stop};
  const auto trace = simulate(profile, cfg);
  expect_bounds(trace, cfg);
  double v_min = 1e9;
  for (const auto& p : trace.samples) {
    if (p.s >= 298 && p.s <= 302) v_min = std::min(v_min, p.v);
  }
  EXPECT_LE(v_min, cfg.v_stop_eps);
  ASSERT_EQ(trace.stops.size(), 1u);
  EXPECT_NEAR(trace.stops[0].halt_position, 300, 2.0);
}

TEST(Simulate, AllZeroProfileNeverMoves) {
  ControllerConfig cfg;
  const auto trace = simulate(constant_profile(100, 0.0), cfg);
  for (const auto& p : trace.samples) EXPECT_LE(p.v, cfg.v_stop_eps);
}

TEST(Simulate, CurveSlowsBeforeTheEventAndHoldsInside) {
  ControllerConfig cfg;
  auto profile = constant_profile(600, 16.0);
  for (int i = 300; i <= 400; ++i) profile[i] = {double(i), 8.0, LimitType::Curve};
  const auto trace = simulate(profile, cfg);
  expect_bounds(trace, cfg);
  double v_at_entry = 0.0;
  double v_inside_max = 0.0;
  for (const auto& p : trace.samples) {
    if (p.s <= 300.0) v_at_entry = p.v;
    if (p.s >= 340.0 && p.s <= 400.0) v_inside_max = std::max(v_inside_max, p.v);
  }
  EXPECT_LT(v_at_entry, 16.0 * 0.8);
  EXPECT_LE(v_inside_max, 8.0 * 1.05);
}

}  // namespace
}  // namespace bevroute
