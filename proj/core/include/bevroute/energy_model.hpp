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
#include <vector>

namespace bevroute {

struct VehicleParams {
  double mass = 1600.0;                // kg
  double gravity = 9.81;               // m/s^2
  double air_density = 1.2256;         // kg/m^3
  double frontal_area = 2.3256;        // m^2
  double drag_coefficient = 0.28;
  double rolling_cr = 1.75;
  double rolling_c1 = 0.0328;
  double rolling_c2 = 4.575;
  double eta_driveline = 0.92;
  double eta_motor = 0.91;
  double eta_battery = 0.90;
  double regen_alpha = 0.0411;         // m/s^2
  double eta_regen_max = 0.95;
  double aux_power = 700.0;            // W
  double battery_capacity_wh = 24000.0;
  double soc_min = 0.20;
  double soc_max = 0.95;
  double v_floor = 0.1;                // m/s, bounds dt on the spatial grid

  void validate() const;
};

struct DriveProfile {
  std::vector<double> acceleration;  // m/s^2
  std::vector<double> dt;            // s
};

// Spatial to temporal conversion: dt_i = ds_i / max(v_i, v_floor) and
// a_i = (v_{i+1} - v_i) / dt_i. Steps without a following interval (the
// last one, or ds_i = 0) copy the previous acceleration.
DriveProfile acceleration_from_velocity(std::span<const double> velocity, std::span<const double> intervals,
                                        const VehicleParams& p = {});
DriveProfile acceleration_from_velocity(std::span<const double> velocity, double ds, const VehicleParams& p = {});

double tractive_force(double v, double a, double theta, const VehicleParams& p) noexcept;
double wheel_power(double force, double v) noexcept;
double regen_efficiency(double a, const VehicleParams& p) noexcept;
double motor_power(double p_wheels, double a, const VehicleParams& p) noexcept;
// Discharge when P_motor + P_aux >= 0, charge otherwise.
double battery_power(double p_motor, const VehicleParams& p) noexcept;

struct EnergyIntegral {
  std::vector<double> cumulative_wh;
  double wh_per_km = 0.0;
};

EnergyIntegral integrate_energy(std::span<const double> p_batt, std::span<const double> dt, double distance_km);

struct SocStep {
  double soc = 0.0;
  bool clamped = false;  // the battery limit was reached on this step
};

SocStep soc_update(double soc_prev, double p_batt, double dt, const VehicleParams& p) noexcept;

struct EnergyResult {
  std::vector<double> acceleration;
  std::vector<double> dt;
  std::vector<double> theta;      // rad
  std::vector<double> force;      // N
  std::vector<double> p_wheels;   // W
  std::vector<double> p_motor;    // W
  std::vector<double> p_batt;     // W
  std::vector<double> energy_wh;  // cumulative
  std::vector<double> soc;        // after each step
  std::vector<std::size_t> clamp_steps;
  double distance_m = 0.0;
  double wh_per_km = 0.0;
};

// intervals[i] is the distance from step i to step i + 1 (zero for the last
// step); grade is in percent and converted with atan(grade / 100).
EnergyResult run_energy_model(std::span<const double> velocity, std::span<const double> grade,
                              std::span<const double> intervals, double initial_soc, const VehicleParams& p);

}  // namespace bevroute
