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

#include "bevroute/energy_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bevroute/error.hpp"

namespace bevroute {

void VehicleParams::validate() const {
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) throw Error(std::string("vehicle parameter ") + name + " must be positive");
  };
  auto fraction = [](double x, const char* name) {
    if (!(x > 0.0 && x <= 1.0)) throw Error(std::string("vehicle parameter ") + name + " must lie in (0, 1]");
  };
  positive(mass, "mass");
  positive(gravity, "gravity");
  positive(air_density, "air_density");
  positive(frontal_area, "frontal_area");
  positive(drag_coefficient, "drag_coefficient");
  if (!(rolling_cr >= 0.0) || !(rolling_c1 >= 0.0) || !(rolling_c2 >= 0.0)) {
    throw Error("rolling resistance coefficients must be non-negative");
  }
  fraction(eta_driveline, "eta_driveline");
  fraction(eta_motor, "eta_motor");
  fraction(eta_battery, "eta_battery");
  fraction(eta_regen_max, "eta_regen_max");
  positive(regen_alpha, "regen_alpha");
  if (!(aux_power >= 0.0)) throw Error("vehicle parameter aux_power must be non-negative");
  positive(battery_capacity_wh, "battery_capacity_wh");
  positive(v_floor, "v_floor");
  if (!(soc_min >= 0.0 && soc_min < soc_max && soc_max <= 1.0)) throw Error("SOC range must satisfy 0 <= min < max <= 1");
}

DriveProfile acceleration_from_velocity(std::span<const double> velocity, std::span<const double> intervals,
                                        const VehicleParams& p) {
  const std::size_t n = velocity.size();
  if (n < 2) throw Error("velocity series needs at least two samples");
  if (intervals.size() != n) throw Error("interval series is not aligned with velocity");
  DriveProfile out;
  out.acceleration.assign(n, 0.0);
  out.dt.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.dt[i] = intervals[i] / std::max(velocity[i], p.v_floor);
    if (i + 1 < n && out.dt[i] > 0.0) {
      out.acceleration[i] = (velocity[i + 1] - velocity[i]) / out.dt[i];
    } else if (i > 0) {
      out.acceleration[i] = out.acceleration[i - 1];
    }
  }
  return out;
}

DriveProfile acceleration_from_velocity(std::span<const double> velocity, double ds, const VehicleParams& p) {
  const std::vector<double> intervals(velocity.size(), ds);
  return acceleration_from_velocity(velocity, intervals, p);
}

double tractive_force(double v, double a, double theta, const VehicleParams& p) noexcept {
  const double inertial = p.mass * a;
  const double grade = p.mass * p.gravity * std::sin(theta);
  const double aero = 0.5 * p.air_density * p.frontal_area * p.drag_coefficient * v * v;
  const double rolling = p.mass * p.gravity * std::cos(theta) * (p.rolling_c2 + p.rolling_c1 * v) * p.rolling_cr / 1000.0;
  return inertial + grade + aero + rolling;
}

double wheel_power(double force, double v) noexcept { return force * v; }

double regen_efficiency(double a, const VehicleParams& p) noexcept {
  if (a >= 0.0) return 0.0;
  return std::min(std::exp(-p.regen_alpha / std::abs(a)), p.eta_regen_max);
}

double motor_power(double p_wheels, double a, const VehicleParams& p) noexcept {
  if (p_wheels >= 0.0) return p_wheels / (p.eta_driveline * p.eta_motor);
  return p_wheels * regen_efficiency(a, p) * p.eta_driveline * p.eta_motor;
}

double battery_power(double p_motor, const VehicleParams& p) noexcept {
  const double demand = p_motor + p.aux_power;
  return demand >= 0.0 ? demand / p.eta_battery : demand * p.eta_battery;
}

EnergyIntegral integrate_energy(std::span<const double> p_batt, std::span<const double> dt, double distance_km) {
  if (p_batt.size() != dt.size()) throw Error("power and time series are not aligned");
  if (!(distance_km > 0.0)) throw Error("zero-length route");
  EnergyIntegral out;
  out.cumulative_wh.reserve(p_batt.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p_batt.size(); ++i) {
    total += p_batt[i] * dt[i] / 3600.0;
    out.cumulative_wh.push_back(total);
  }
  out.wh_per_km = total / distance_km;
  return out;
}

SocStep soc_update(double soc_prev, double p_batt, double dt, const VehicleParams& p) noexcept {
  const double raw = soc_prev - p_batt * dt / (3600.0 * p.battery_capacity_wh);
  SocStep step;
  step.soc = std::clamp(raw, p.soc_min, p.soc_max);
  step.clamped = raw < p.soc_min || raw > p.soc_max;
  return step;
}

EnergyResult run_energy_model(std::span<const double> velocity, std::span<const double> grade,
                              std::span<const double> intervals, double initial_soc, const VehicleParams& p) {
  p.validate();
  const std::size_t n = velocity.size();
  if (grade.size() != n || intervals.size() != n) throw Error("energy inputs are not aligned");
  if (!(initial_soc >= p.soc_min && initial_soc <= p.soc_max)) throw Error("initial SOC outside the operating range");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(velocity[i]) || !std::isfinite(grade[i]) || !std::isfinite(intervals[i])) {
      throw Error("non-finite energy input at step " + std::to_string(i));
    }
  }
  double distance = 0.0;
  for (double ds : intervals) distance += ds;
  if (n < 2 || !(distance > 0.0)) throw Error("zero-length route");

  EnergyResult r;
  auto profile = acceleration_from_velocity(velocity, intervals, p);
  r.acceleration = std::move(profile.acceleration);
  r.dt = std::move(profile.dt);
  r.distance_m = distance;
  r.theta.resize(n);
  r.force.resize(n);
  r.p_wheels.resize(n);
  r.p_motor.resize(n);
  r.p_batt.resize(n);
  r.soc.resize(n);
  double soc = initial_soc;
  for (std::size_t i = 0; i < n; ++i) {
    r.theta[i] = std::atan(grade[i] / 100.0);
    r.force[i] = tractive_force(velocity[i], r.acceleration[i], r.theta[i], p);
    r.p_wheels[i] = wheel_power(r.force[i], velocity[i]);
    r.p_motor[i] = motor_power(r.p_wheels[i], r.acceleration[i], p);
    r.p_batt[i] = battery_power(r.p_motor[i], p);
    const auto step = soc_update(soc, r.p_batt[i], r.dt[i], p);
    soc = step.soc;
    r.soc[i] = soc;
    if (step.clamped) r.clamp_steps.push_back(i);
  }
  auto integral = integrate_energy(r.p_batt, r.dt, distance / 1000.0);
  r.energy_wh = std::move(integral.cumulative_wh);
  r.wh_per_km = integral.wh_per_km;
  return r;
}

}  // namespace bevroute
