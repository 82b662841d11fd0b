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

namespace bevroute {

struct TraceSample {
  double t = 0.0;    // s
  double s = 0.0;    // m
  double v = 0.0;    // m/s
  double a = 0.0;    // m/s^2
  double j = 0.0;    // m/s^3
  double v_c = 0.0;  // commanded velocity, m/s
};

struct StopRecord {
  double event_arc_length = 0.0;  // where the stop was requested
  double halt_position = 0.0;     // where the vehicle came to rest
  double halt_time = 0.0;
};

// Time series produced by the longitudinal simulator. Samples are spaced by
// the integration step.
struct SimTrace {
  std::vector<TraceSample> samples;
  std::vector<StopRecord> stops;

  bool empty() const noexcept { return samples.empty(); }
  double final_distance() const noexcept { return samples.empty() ? 0.0 : samples.back().s; }
  double duration() const noexcept { return samples.empty() ? 0.0 : samples.back().t; }
};

}  // namespace bevroute
