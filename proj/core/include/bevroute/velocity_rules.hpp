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

#include <vector>

#include "bevroute/route_model.hpp"

namespace bevroute {

enum class LimitType : int {
  Default = 1,  // posted speed limit
  Curve = 2,    // curvature-limited
  Stop = 3,     // full stop required
};

struct ReferencePoint {
  double arc_length = 0.0;
  double v_ref = 0.0;  // m/s
  LimitType limit_type = LimitType::Default;
};

struct RuleThresholds {
  double heading_change_deg = 60.0;
  // Curvature index (degrees per 10 m) above which the average edge speed
  // replaces the posted limit.
  double curvature = 10.0;
  // Stop-classified steps closer than this to the previous one belong to the
  // same stop event.
  double stop_merge_window_m = 2.0;

  void validate() const;
};

struct NodeClass {
  double v_ref = 0.0;
  LimitType limit_type = LimitType::Default;
};

// Priority rules, first match wins:
//   1. traffic signal, stop sign or yield sign           -> stop
//   2. edge start with heading change above threshold    -> stop
//   3. edge end with heading change above threshold      -> stop
//   4. curvature above threshold                         -> average edge speed
//   5. otherwise                                         -> posted speed limit
NodeClass classify_node(const RoadFeatures& f, const RuleThresholds& t) noexcept;

// One reference point per route step. Runs of stop steps are collapsed to a
// single stop at the middle of the run; the other steps of the run fall
// through to rules 4 and 5.
std::vector<ReferencePoint> build_reference_profile(const DiscretizedRoute& route, const RuleThresholds& t);

std::vector<double> stop_positions(const std::vector<ReferencePoint>& profile);

}  // namespace bevroute
