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
#include <string>
#include <vector>

#include "bevroute/linalg.hpp"
#include "bevroute/lstm_model.hpp"
#include "bevroute/route_model.hpp"

namespace bevroute {

struct InferenceOptions {
  // Feed the model's own predictions back as past velocity instead of the
  // controller trace. Windows then run sequentially.
  bool closed_loop = false;
  // Reach of the approaching_stop / departing_stop indicators, m.
  double stop_indicator_window_m = 20.0;
  // Worker threads for open-loop windows; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

// Unscaled road feature matrix, one row per route step and one column per
// name. Recognised names: elevation, heading, speed_limit, avg_edge_speed,
// curvature, grade, heading_change, edge_position, traffic_signal,
// stop_sign, yield_sign, stop_yield_sign, roundabout, edge_class, link,
// approaching_stop, departing_stop.
Matrix build_road_feature_matrix(const DiscretizedRoute& route, std::span<const std::string> names,
                                 std::span<const double> stop_positions, double indicator_window_m);

// Number of inference windows for a route with the given step count.
std::size_t window_count(std::size_t steps, const ModelDims& dims) noexcept;

struct WindowReport {
  std::size_t origin = 0;    // step index k of the last past row
  std::size_t retained = 0;  // predictions kept from the window
  std::size_t written = 0;   // predictions that landed on route steps
};

struct InferenceResult {
  std::vector<double> velocity;  // m/s, one per route step
  std::vector<WindowReport> windows;
};

// Windows start at k = s_P and advance by the stride while k < N - 1. Steps
// 0..s_P copy the past velocity; window k writes steps k+1..k+retain.
InferenceResult batch_inference(const DiscretizedRoute& route, const VehicleStates& past,
                                std::span<const double> stop_positions, const DriverModel& model,
                                const InferenceOptions& options = {});

}  // namespace bevroute
