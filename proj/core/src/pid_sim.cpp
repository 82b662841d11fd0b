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

#include "bevroute/pid_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bevroute/error.hpp"

namespace bevroute {

void ControllerConfig::validate() const {
  if (!(k1 > 0.0 && k1 < k2 && k2 < k3)) throw Error("controller gains must satisfy 0 < k1 < k2 < k3");
  if (!(a_min < 0.0 && a_max > 0.0)) throw Error("acceleration limits must satisfy a_min < 0 < a_max");
  if (!(j_min < 0.0 && j_max > 0.0)) throw Error("jerk limits must satisfy j_min < 0 < j_max");
  if (!(h > 0.0)) throw Error("integration step must be positive");
  if (!(k_curve > 0.0)) throw Error("k_curve must be positive");
  if (!(v_stop_eps > 0.0)) throw Error("v_stop_eps must be positive");
  if (!(stop_dwell_s >= 0.0)) throw Error("stop dwell must be non-negative");
  if (!(stop_tolerance_m >= 0.0)) throw Error("stop tolerance must be non-negative");
  if (!(lut_dv > 0.0 && lut_v_max > lut_dv)) throw Error("invalid LUT grid");
  if (!(lut_max_time_s > 0.0 && max_time_factor >= 1.0 && stop_time_allowance_s >= 0.0)) {
    throw Error("invalid time guards");
  }
}

StoppingLUT::StoppingLUT(std::vector<double> velocity, std::vector<double> distance)
    : velocity_(std::move(velocity)), distance_(std::move(distance)) {
  if (velocity_.size() < 2 || velocity_.size() != distance_.size()) throw Error("LUT needs at least two points");
  for (std::size_t i = 1; i < velocity_.size(); ++i) {
    if (!(velocity_[i] > velocity_[i - 1])) throw Error("LUT velocity grid must be ascending");
  }
}

double StoppingLUT::operator()(double v) const noexcept {
  if (velocity_.empty() || v <= velocity_.front()) return distance_.empty() ? 0.0 : distance_.front();
  const auto it = std::upper_bound(velocity_.begin(), velocity_.end(), v);
  // Past the grid: extend the last segment.
  const std::size_t hi = it == velocity_.end() ? velocity_.size() - 1 : static_cast<std::size_t>(it - velocity_.begin());
  const std::size_t lo = hi - 1;
  const double f = (v - velocity_[lo]) / (velocity_[hi] - velocity_[lo]);
  return distance_[lo] + f * (distance_[hi] - distance_[lo]);
}

double sat(double x, double lo, double hi) {
  if (lo > hi) throw Error("sat: lower bound exceeds upper bound");
  return std::min(hi, std::max(lo, x));
}

StateDerivative dynamics_derivative(const SimState& st, double v_c, const ControllerConfig& cfg) noexcept {
  const double a_cmd = std::clamp(cfg.k1 * (v_c - st.v), cfg.a_min, cfg.a_max);
  const double j_cmd = std::clamp(cfg.k2 * (a_cmd - st.a), cfg.j_min, cfg.j_max);
  return {st.v, st.a, st.j, cfg.k3 * (j_cmd - st.j)};
}

SimState euler_step(const SimState& st, double v_c, const ControllerConfig& cfg) {
  const auto d = dynamics_derivative(st, v_c, cfg);
  SimState next{st.s + d.ds * cfg.h, st.v + d.dv * cfg.h, st.a + d.da * cfg.h, st.j + d.dj * cfg.h, st.t + cfg.h};
  if (!std::isfinite(next.s) || !std::isfinite(next.v) || !std::isfinite(next.a) || !std::isfinite(next.j)) {
    throw Error("non-finite state at t = " + std::to_string(st.t) + " s; reduce the integration step");
  }
  if (next.v < 0.0) {
    next.v = 0.0;
    next.a = 0.0;
    next.j = 0.0;
  }
  return next;
}

double simulate_stop_distance(double v0, const ControllerConfig& cfg) {
  if (v0 <= cfg.v_stop_eps) return 0.0;
  SimState st{0.0, v0, cfg.a0, 0.0, 0.0};
  while (st.v > cfg.v_stop_eps) {
    st = euler_step(st, 0.0, cfg);
    if (st.t > cfg.lut_max_time_s) {
      throw Error("stop from " + std::to_string(v0) + " m/s did not complete within " +
                  std::to_string(cfg.lut_max_time_s) + " s; check controller gains");
    }
  }
  return st.s;
}

StoppingLUT build_stopping_lut(const ControllerConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(std::floor(cfg.lut_v_max / cfg.lut_dv + 1e-9)) + 1;
  std::vector<double> v(n);
  std::vector<double> d(n);
  double running = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = static_cast<double>(i) * cfg.lut_dv;
    running = std::max(running, simulate_stop_distance(v[i], cfg));
    d[i] = running;
  }
  return StoppingLUT(std::move(v), std::move(d));
}

double required_decel_distance(double v, const ReferencePoint& event, const StoppingLUT& lut) noexcept {
  if (event.limit_type == LimitType::Stop) return lut(v);
  if (v <= event.v_ref || v <= 0.0) return 0.0;
  return lut(v) * (v - event.v_ref) / v;
}

double command_velocity(const SimState& st, TrackingMode mode, const ReferencePoint* event, double base_ref,
                        const StoppingLUT& lut, const ControllerConfig& cfg) noexcept {
  switch (mode) {
    case TrackingMode::StandardSpeedLimit: return base_ref;
    case TrackingMode::StopEvent: return 0.0;
    case TrackingMode::CurveSpeed: {
      if (event == nullptr) return base_ref;
      const double v_f = event->v_ref;
      const double gap = std::max(event->arc_length - st.s, 0.1);
      const double s_r = required_decel_distance(st.v, *event, lut);
      return std::max(0.0, v_f - std::abs(v_f * std::tanh(cfg.k_curve * s_r / gap)));
    }
  }
  return base_ref;
}

ModeSelection update_tracking_mode(const SimState& st, std::span<const ReferencePoint> events, const StoppingLUT& lut,
                                   const ControllerConfig& cfg) {
  const double horizon = lut(st.v);
  ModeSelection best;
  double best_gap = 0.0;
  for (const auto& e : events) {
    const double gap = e.arc_length - st.s;
    const bool is_stop = e.limit_type == LimitType::Stop;
    const bool at_stop = is_stop && std::abs(gap) <= cfg.stop_tolerance_m;
    if (!at_stop) {
      if (gap <= 0.0) continue;
      if (gap > horizon) {
        if (gap > horizon + cfg.stop_tolerance_m) break;
        continue;
      }
      if (!(gap < required_decel_distance(st.v, e, lut))) continue;
    }
    const bool better = !best.event || gap < best_gap || (gap == best_gap && is_stop &&
                                                          best.event->limit_type != LimitType::Stop);
    if (better) {
      best.event = e;
      best.mode = is_stop ? TrackingMode::StopEvent : TrackingMode::CurveSpeed;
      best_gap = gap;
    }
  }
  return best;
}

std::vector<ReferencePoint> extract_events(std::span<const ReferencePoint> profile) {
  std::vector<ReferencePoint> events;
  double prev_cruise = -1.0;
  for (const auto& p : profile) {
    if (p.limit_type == LimitType::Stop) {
      events.push_back(p);
      continue;
    }
    if (prev_cruise >= 0.0 && p.v_ref < prev_cruise - 1e-9) events.push_back(p);
    prev_cruise = p.v_ref;
  }
  return events;
}

namespace {

// Reference to track between events: stop points inherit the preceding
// (or, at the route start, following) non-stop reference.
std::vector<double> cruise_reference(std::span<const ReferencePoint> profile) {
  std::vector<double> cruise(profile.size(), 0.0);
  std::optional<double> last;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (profile[i].limit_type != LimitType::Stop) last = profile[i].v_ref;
    cruise[i] = last.value_or(-1.0);
  }
  std::optional<double> next;
  for (std::size_t i = profile.size(); i-- > 0;) {
    if (profile[i].limit_type != LimitType::Stop) next = profile[i].v_ref;
    if (cruise[i] < 0.0) cruise[i] = next.value_or(0.0);
  }
  return cruise;
}

enum class Phase { Standard, Curve, Stop, Dwell };

}  // namespace

SimTrace simulate(std::span<const ReferencePoint> profile, const ControllerConfig& cfg) {
  return simulate(profile, cfg, build_stopping_lut(cfg));
}

SimTrace simulate(std::span<const ReferencePoint> profile, const ControllerConfig& cfg, const StoppingLUT& lut) {
  cfg.validate();
  if (profile.empty()) throw Error("empty reference profile");
  if (std::abs(profile.front().arc_length) > 1e-9) throw Error("reference profile must start at arc length 0");

  const auto cruise = cruise_reference(profile);
  const auto events = extract_events(profile);
  std::vector<bool> done(events.size(), false);
  const double total = profile.back().arc_length;

  SimTrace trace;
  SimState st;
  trace.samples.push_back({st.t, st.s, st.v, st.a, st.j, 0.0});

  const double v_peak = *std::max_element(cruise.begin(), cruise.end());
  if (total <= 0.0 || v_peak <= cfg.v_stop_eps) return trace;

  std::size_t n_stops = 0;
  double ideal_time = 0.0;
  for (std::size_t i = 0; i + 1 < profile.size(); ++i) {
    ideal_time += (profile[i + 1].arc_length - profile[i].arc_length) / std::max(cruise[i], 1.0);
  }
  for (const auto& e : events) n_stops += e.limit_type == LimitType::Stop ? 1 : 0;
  const double time_limit = cfg.max_time_factor * ideal_time + cfg.stop_time_allowance_s * static_cast<double>(n_stops);

  Phase phase = Phase::Standard;
  std::size_t active = 0;
  double dwell_left = 0.0;
  std::size_t first_open = 0;
  std::size_t cursor = 0;

  auto base_ref_at = [&](double s) {
    while (cursor + 1 < profile.size() && profile[cursor + 1].arc_length <= s) ++cursor;
    return cruise[cursor];
  };
  auto open_events = [&]() {
    std::vector<ReferencePoint> open;
    for (std::size_t i = first_open; i < events.size(); ++i) {
      if (!done[i]) open.push_back(events[i]);
      if (events[i].arc_length > st.s + lut(st.v) + cfg.stop_tolerance_m) break;
    }
    return open;
  };
  auto index_of = [&](const ReferencePoint& e) {
    for (std::size_t i = first_open; i < events.size(); ++i) {
      if (!done[i] && events[i].arc_length == e.arc_length && events[i].limit_type == e.limit_type) return i;
    }
    return events.size();
  };

  while (st.s < total) {
    if (st.t > time_limit) {
      throw Error("simulation exceeded the time guard of " + std::to_string(time_limit) + " s at s = " +
                  std::to_string(st.s) + " m");
    }
    // Retire events the vehicle has moved past.
    for (std::size_t i = first_open; i < events.size(); ++i) {
      if (done[i]) continue;
      const bool is_stop = events[i].limit_type == LimitType::Stop;
      const bool passed = is_stop ? st.s > events[i].arc_length + cfg.stop_tolerance_m : st.s >= events[i].arc_length;
      const bool engaged = phase != Phase::Standard && i == active;
      if (passed && !engaged) done[i] = true;
      if (events[i].arc_length > st.s + cfg.stop_tolerance_m) break;
    }
    while (first_open < events.size() && done[first_open]) ++first_open;

    const double base = base_ref_at(st.s);

    if (phase == Phase::Curve) {
      std::vector<ReferencePoint> stops;
      for (const auto& e : open_events()) {
        if (e.limit_type == LimitType::Stop) stops.push_back(e);
      }
      const auto sel = update_tracking_mode(st, stops, lut, cfg);
      if (sel.mode == TrackingMode::StopEvent) {
        active = index_of(*sel.event);
        phase = Phase::Stop;
      } else if (st.s >= events[active].arc_length) {
        done[active] = true;
        phase = Phase::Standard;
      }
    }
    if (phase == Phase::Standard) {
      const auto sel = update_tracking_mode(st, open_events(), lut, cfg);
      if (sel.event) {
        active = index_of(*sel.event);
        phase = sel.mode == TrackingMode::StopEvent ? Phase::Stop : Phase::Curve;
      }
    }
    if (phase == Phase::Stop && st.v <= cfg.v_stop_eps) {
      const double gap = events[active].arc_length - st.s;
      if (gap <= cfg.stop_tolerance_m) {
        trace.stops.push_back({events[active].arc_length, st.s, st.t});
        phase = Phase::Dwell;
        dwell_left = cfg.stop_dwell_s;
      } else {
        phase = Phase::Standard;  // halted short; roll up to the stop point
      }
    }
    if (phase == Phase::Dwell && dwell_left <= 0.0) {
      done[active] = true;
      phase = Phase::Standard;
    }

    double v_c = base;
    switch (phase) {
      case Phase::Standard:
        v_c = command_velocity(st, TrackingMode::StandardSpeedLimit, nullptr, base, lut, cfg);
        break;
      case Phase::Curve:
        v_c = command_velocity(st, TrackingMode::CurveSpeed, &events[active], base, lut, cfg);
        break;
      case Phase::Stop:
      case Phase::Dwell:
        v_c = command_velocity(st, TrackingMode::StopEvent, &events[active], base, lut, cfg);
        break;
    }
    if (phase == Phase::Dwell) dwell_left -= cfg.h;

    trace.samples.back().v_c = v_c;
    st = euler_step(st, v_c, cfg);
    trace.samples.push_back({st.t, st.s, st.v, st.a, st.j, v_c});
  }
  return trace;
}

}  // namespace bevroute
