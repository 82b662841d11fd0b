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

#include <gtest/gtest.h>

#include "bevroute/energy_model.hpp"
#include "bevroute/error.hpp"

namespace bevroute {
namespace {

TEST(AccelerationFromVelocity, ConstantAndRamp) {
  const std::vector<double> flat(5, 10.0);
  const auto p = acceleration_from_velocity(flat, 1.0);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(p.acceleration[i], 0.0);
    EXPECT_DOUBLE_EQ(p.dt[i], 0.1);
  }
  const std::vector<double> ramp{10.0, 10.1};
  const auto r = acceleration_from_velocity(ramp, 1.0);
  EXPECT_DOUBLE_EQ(r.dt[0], 0.1);
  EXPECT_NEAR(r.acceleration[0], 1.0, 1e-9);
  EXPECT_NEAR(r.acceleration[1], 1.0, 1e-9);
}

TEST(AccelerationFromVelocity, StandstillUsesFloor) {
  const std::vector<double> v{0.0, 0.0, 1.0};
  const auto p = acceleration_from_velocity(v, 1.0);
  EXPECT_DOUBLE_EQ(p.dt[0], 10.0);
  EXPECT_TRUE(std::isfinite(p.acceleration[1]));
  EXPECT_THROW(acceleration_from_velocity(std::vector<double>{1.0}, 1.0), Error);
}

TEST(TractiveForce, HandValues) {
  const VehicleParams p;
  EXPECT_NEAR(tractive_force(0, 0, 0, p), 1600 * 9.81 * 4.575 * 1.75 / 1000, 1e-9);
  EXPECT_NEAR(tractive_force(0, 0, 0, p), 125.67, 5e-3);
  VehicleParams no_roll = p;
  no_roll.rolling_cr = 0.0;
  EXPECT_DOUBLE_EQ(tractive_force(0, 1, 0, no_roll), p.mass);
  const double th = std::atan(0.02);
  EXPECT_NEAR(tractive_force(12, 0.3, th, p) - tractive_force(12, 0.3, -th, p), 2 * p.mass * p.gravity * std::sin(th),
              1e-9);
}

TEST(WheelPower, Product) {
  EXPECT_EQ(wheel_power(125.67, 0), 0.0);
  EXPECT_EQ(wheel_power(500, 20), 10000.0);
  EXPECT_EQ(wheel_power(-300, 15), -4500.0);
}

TEST(RegenEfficiency, Law) {
  const VehicleParams p;
  EXPECT_EQ(regen_efficiency(0.5, p), 0.0);
  EXPECT_EQ(regen_efficiency(0.0, p), 0.0);
  EXPECT_NEAR(std::exp(-p.regen_alpha / 1.0), 0.9597, 1e-4);
  EXPECT_NEAR(regen_efficiency(-1.0, p), 0.95, 1e-12);
  EXPECT_LT(regen_efficiency(-1e-6, p), 1e-12);
  VehicleParams loose = p;
  loose.eta_regen_max = 1.0;
  EXPECT_NEAR(regen_efficiency(-1.0, loose), 0.9597, 1e-4);
}

TEST(MotorPower, TractionAndRegen) {
  VehicleParams p;
  EXPECT_NEAR(motor_power(9200, 0.5, p), 10989.0, 0.05);
  p.eta_regen_max = 1.0;
  EXPECT_NEAR(motor_power(-10000, -1.0, p), -8034.5, 0.5);
  EXPECT_EQ(motor_power(0, 0, p), 0.0);
}

TEST(BatteryPower, Branches) {
  const VehicleParams p;
  EXPECT_NEAR(battery_power(10989, p), 12987.8, 0.05);
  EXPECT_NEAR(battery_power(-8034.5, p), -6601.05, 1e-9);
  EXPECT_EQ(battery_power(-p.aux_power, p), 0.0);
}

TEST(IntegrateEnergy, PerKilometre) {
  const std::vector<double> pb(360, 10000.0), dt(360, 1.0);
  EXPECT_NEAR(integrate_energy(pb, dt, 3.0).wh_per_km, 333.333, 1e-3);
  const std::vector<double> zero(10, 0.0), ones(10, 1.0);
  EXPECT_EQ(integrate_energy(zero, ones, 1.0).wh_per_km, 0.0);
  const std::vector<double> cancel{500.0, -500.0}, two{1.0, 1.0};
  EXPECT_NEAR(integrate_energy(cancel, two, 1.0).cumulative_wh.back(), 0.0, 1e-15);
  EXPECT_THROW(integrate_energy(zero, ones, 0.0), Error);
}

TEST(SocUpdate, DeltaAndClamp) {
  const VehicleParams p;
  EXPECT_NEAR(0.9 - soc_update(0.9, 24000, 1, p).soc, 2.7778e-4, 1e-8);
  EXPECT_EQ(soc_update(0.5, 0, 1, p).soc, 0.5);
  const auto low = soc_update(0.20, 5000, 10, p);
  EXPECT_EQ(low.soc, 0.20);
  EXPECT_TRUE(low.clamped);
  EXPECT_FALSE(soc_update(0.20, 0, 10, p).clamped);
}

std::vector<double> unit_intervals(std::size_t n) {
  std::vector<double> ds(n, 1.0);
  ds.back() = 0.0;
  return ds;
}

TEST(RunEnergyModel, FlatConstantSpeed) {
  const VehicleParams p;
  const std::size_t n = 1001;
  const std::vector<double> v(n, 15.0), g(n, 0.0);
  const auto r = run_energy_model(v, g, unit_intervals(n), 0.9, p);
  for (std::size_t i = 1; i < n; ++i) {
    EXPECT_NEAR(r.p_batt[i], r.p_batt[0], 1e-9);
    EXPECT_LE(r.soc[i], r.soc[i - 1]);
  }
  EXPECT_GT(r.p_batt[0], 0.0);
  const double drop1 = r.soc[0] - r.soc[1];
  EXPECT_NEAR(r.soc[500] - r.soc[501], drop1, 1e-12);
  EXPECT_NEAR(r.distance_m, 1000.0, 1e-9);
}

TEST(RunEnergyModel, DescentProducesNegativeWheelPower) {
  const VehicleParams p;
  const std::size_t n = 201;
  const std::vector<double> v(n, 12.0), g(n, -8.0);
  const auto r = run_energy_model(v, g, unit_intervals(n), 0.9, p);
  for (double pw : r.p_wheels) EXPECT_LT(pw, 0.0);
}

TEST(RunEnergyModel, MatchesStepwiseComposition) {
  const VehicleParams p;
  std::vector<double> v, g;
  for (int i = 0; i < 300; ++i) {
    v.push_back(10.0 + 4.0 * std::sin(i / 17.0));
    g.push_back(5.0 * std::cos(i / 40.0));
  }
  const auto ds = unit_intervals(v.size());
  const auto r = run_energy_model(v, g, ds, 0.8, p);
  const auto prof = acceleration_from_velocity(v, ds, p);
  double soc = 0.8, e = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double th = std::atan(g[i] / 100.0);
    const double pw = wheel_power(tractive_force(v[i], prof.acceleration[i], th, p), v[i]);
    const double pm = motor_power(pw, prof.acceleration[i], p);
    const double pb = battery_power(pm, p);
    e += pb * prof.dt[i] / 3600.0;
    soc = soc_update(soc, pb, prof.dt[i], p).soc;
    EXPECT_NEAR(r.p_batt[i], pb, 1e-9 * std::max(1.0, std::abs(pb)));
    EXPECT_NEAR(r.soc[i], soc, 1e-12);
    EXPECT_NEAR(r.energy_wh[i], e, 1e-9 * std::max(1.0, std::abs(e)));
    if (pw < 0) EXPECT_LE(pm, 0.0);
    if (pw >= 0) EXPECT_GE(pm, 0.0);
  }
}

TEST(RunEnergyModel, SocStaysInRangeAndReportsClamps) {
  VehicleParams p;
  p.battery_capacity_wh = 1.0;
  const std::size_t n = 500;
  const std::vector<double> v(n, 20.0), g(n, 6.0);
  const auto r = run_energy_model(v, g, unit_intervals(n), 0.3, p);
  for (double s : r.soc) {
    EXPECT_GE(s, p.soc_min);
    EXPECT_LE(s, p.soc_max);
  }
  EXPECT_FALSE(r.clamp_steps.empty());
}

TEST(RunEnergyModel, ZeroLengthRouteIsAnError) {
  const std::vector<double> v(3, 10.0), g(3, 0.0), ds(3, 0.0);
  EXPECT_THROW(run_energy_model(v, g, ds, 0.9, VehicleParams{}), Error);
}

TEST(RunEnergyModel, EnergyIsAdditiveOverPartitions) {
  const VehicleParams p;
  std::vector<double> v, g;
  for (int i = 0; i < 400; ++i) {
    v.push_back(8.0 + 3.0 * std::sin(i / 23.0));
    g.push_back(2.0);
  }
  const auto ds = unit_intervals(v.size());
  const auto whole = run_energy_model(v, g, ds, 0.9, p);
  std::vector<double> ds_a(ds.begin(), ds.begin() + 150), ds_b(ds.begin() + 150, ds.end());
  const auto prof = acceleration_from_velocity(v, ds, p);
  double ea = 0.0, eb = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) (i < 150 ? ea : eb) += whole.p_batt[i] * prof.dt[i] / 3600.0;
  const double ec_a = ea / 0.150, ec_b = eb / (whole.distance_m / 1000.0 - 0.150);
  const double weighted = (ec_a * 0.150 + ec_b * (whole.distance_m / 1000.0 - 0.150)) / (whole.distance_m / 1000.0);
  EXPECT_NEAR(weighted, whole.wh_per_km, 1e-9 * std::abs(whole.wh_per_km));
}

}  // namespace
}  // namespace bevroute
