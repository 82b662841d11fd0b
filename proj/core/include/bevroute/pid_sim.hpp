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

#include <optional>
#include <span>
#include <vector>

#include "bevroute/sim_trace.hpp"
#include "bevroute/velocity_rules.hpp"

namespace bevroute {

struct SimState {
  double s = 0.0;  // m
  double v = 0.0;  // m/s
  double a = 0.0;  // m/s^2
  double j = 0.0;  // m/s^3
  double t = 0.0;  // s
};

struct ControllerConfig {
  // Cascade gains (1/s): velocity -> acceleration -> jerk -> jerk rate.
  double k1 = 0.5;
  double k2 = 2.0;
  double k3 = 8.0;
  double a_min = -4.0;
  double a_max = 2.0;
  double j_min = -10.0;
  double j_max = 10.0;
  double h = 0.01;        // integration step, s
  double k_curve = 0.5;   // gain inside the curve approach tanh
  double a0 = 2.0;        // acceleration assumed when braking starts (LUT design point)
  double v_stop_eps = 0.1;
  double stop_dwell_s = 1.0;
  // A halt farther than this short of a stop point is not the stop; the
  // vehicle rolls up to the point and stops again.
  double stop_tolerance_m = 1.0;
  double lut_v_max = 45.0;
  double lut_dv = 0.5;
  double lut_max_time_s = 300.0;
  double max_time_factor = 4.0;
  double stop_time_allowance_s = 30.0;  // added to the time guard per stop event

  void validate() const;
};

// Worst-case stopping distance versus speed, linearly interpolated.
class StoppingLUT {
 public:
  StoppingLUT() = default;
  StoppingLUT(std::vector<double> velocity, std::vector<double> distance);

  double operator()(double v) const noexcept;
  const std::vector<double>& velocity() const noexcept { return velocity_; }
  const std::vector<double>& distance() const noexcept { return distance_; }

 private:
  std::vector<double> velocity_;
  std::vector<double> distance_;
};

enum class TrackingMode { StandardSpeedLimit, CurveSpeed, StopEvent };

double sat(double x, double lo, double hi);

struct StateDerivative {
  double ds = 0.0;
  double dv = 0.0;
  double da = 0.0;
  double dj = 0.0;
};

StateDerivative dynamics_derivative(const SimState& state, double v_c, const ControllerConfig& cfg) noexcept;

// One explicit Euler step. Velocity is clamped at zero; a clamped step also
// zeroes acceleration and jerk.
SimState euler_step(const SimState& state, double v_c, const ControllerConfig& cfg);

// Distance covered from (v0, a0) with a zero command until v <= v_stop_eps.
double simulate_stop_distance(double v0, const ControllerConfig& cfg);

StoppingLUT build_stopping_lut(const ControllerConfig& cfg);

// Stop: LUT(v). Any other event: LUT(v) * (v - v_f) / v, zero once v <= v_f.
double required_decel_distance(double v, const ReferencePoint& event, const StoppingLUT& lut) noexcept;

double command_velocity(const SimState& state, TrackingMode mode, const ReferencePoint* event, double base_ref,
                        const StoppingLUT& lut, const ControllerConfig& cfg) noexcept;

struct ModeSelection {
  TrackingMode mode = TrackingMode::StandardSpeedLimit;
  std::optional<ReferencePoint> event;
};

// Trigger rule evaluated from standard tracking: among events inside the
// look-ahead horizon LUT(v), the nearest one whose remaining distance is
// below its required deceleration distance is activated. A stop wins a tie.
// Stops within stop_tolerance_m of the vehicle always activate.
ModeSelection update_tracking_mode(const SimState& state, std::span<const ReferencePoint> events,
                                   const StoppingLUT& lut, const ControllerConfig& cfg);

// Events the simulator reacts to: every stop point and every point whose
// cruise reference is lower than its predecessor's.
std::vector<ReferencePoint> extract_events(std::span<const ReferencePoint> profile);

// Tracks the reference profile from rest at arc length 0 until the end of the
// profile is reached.
SimTrace simulate(std::span<const ReferencePoint> profile, const ControllerConfig& cfg);
SimTrace simulate(std::span<const ReferencePoint> profile, const ControllerConfig& cfg, const StoppingLUT& lut);

}  // namespace bevroute
