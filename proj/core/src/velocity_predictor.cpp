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

#include "bevroute/velocity_predictor.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "bevroute/error.hpp"

namespace bevroute {

namespace {

double road_value(const RouteStep& step, const std::string& name, std::span<const double> stops, double window) {
  const auto& f = step.features;
  if (name == "elevation") return f.elevation;
  if (name == "heading") return f.heading;
  if (name == "speed_limit") return f.speed_limit;
  if (name == "avg_edge_speed") return f.avg_edge_speed;
  if (name == "curvature") return f.curvature;
  if (name == "grade") return f.grade;
  if (name == "heading_change") return f.heading_change;
  if (name == "edge_position") return f.edge_position;
  if (name == "traffic_signal") return f.traffic_signal ? 1.0 : 0.0;
  if (name == "stop_sign") return f.stop_sign ? 1.0 : 0.0;
  if (name == "yield_sign") return f.yield_sign ? 1.0 : 0.0;
  if (name == "stop_yield_sign") return (f.stop_sign || f.yield_sign) ? 1.0 : 0.0;
  if (name == "roundabout") return f.roundabout ? 1.0 : 0.0;
  if (name == "edge_class") return static_cast<double>(static_cast<int>(f.edge_class));
  if (name == "link") return f.link ? 1.0 : 0.0;
  if (name == "approaching_stop") {
    const auto it = std::lower_bound(stops.begin(), stops.end(), step.arc_length);
    return (it != stops.end() && *it - step.arc_length <= window) ? 1.0 : 0.0;
  }
  if (name == "departing_stop") {
    const auto it = std::lower_bound(stops.begin(), stops.end(), step.arc_length);
    return (it != stops.begin() && step.arc_length - *(it - 1) <= window) ? 1.0 : 0.0;
  }
  throw Error("unknown road feature '" + name + "'");
}

double vehicle_value(const VehicleStates& states, const std::string& name, std::size_t i) {
  if (name == "velocity") return states.velocity[i];
  if (name == "acceleration") return states.acceleration[i];
  throw Error("unknown vehicle feature '" + name + "'");
}

std::size_t column_of(const std::vector<std::string>& names, const std::string& name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error("feature '" + name + "' missing from layout");
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

Matrix build_road_feature_matrix(const DiscretizedRoute& route, std::span<const std::string> names,
                                 std::span<const double> stop_positions, double indicator_window_m) {
  if (!route.has_features) throw Error("route has no road features");
  if (!std::is_sorted(stop_positions.begin(), stop_positions.end())) throw Error("stop positions must be sorted");
  Matrix out(static_cast<Eigen::Index>(route.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < route.size(); ++i) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          road_value(route.steps[i], names[c], stop_positions, indicator_window_m);
    }
  }
  return out;
}

std::size_t window_count(std::size_t steps, const ModelDims& dims) noexcept {
  const auto sp = static_cast<std::size_t>(dims.past_steps);
  if (steps < 2 || sp >= steps - 1) return 0;
  const auto stride = static_cast<std::size_t>(dims.stride);
  return (steps - 2 - sp) / stride + 1;
}

InferenceResult batch_inference(const DiscretizedRoute& route, const VehicleStates& past,
                                std::span<const double> stop_positions, const DriverModel& model,
                                const InferenceOptions& options) {
  const auto& dims = model.dims;
  dims.validate();
  const std::size_t n = route.size();
  if (past.velocity.size() != n || past.acceleration.size() != n) {
    throw Error("past vehicle states are not aligned with the route");
  }
  const auto sp = static_cast<std::size_t>(dims.past_steps);
  const auto sf = static_cast<std::size_t>(dims.future_steps);
  const auto stride = static_cast<std::size_t>(dims.stride);
  const auto retain = static_cast<std::size_t>(dims.retain);
  if (n < sp + stride + 1) {
    throw Error("route too short for inference: " + std::to_string(n) + " steps, need " +
                std::to_string(sp + stride + 1));
  }

  const auto& layout = model.features;
  const auto vehicle_cols = model.scaler.columns(layout.vehicle);
  const auto road_cols = model.scaler.columns(layout.road);
  const auto predicted_cols = model.scaler.columns(layout.predicted);
  const std::size_t out_col = column_of(layout.predicted, "velocity");

  const Matrix road = scale(build_road_feature_matrix(route, layout.road, stop_positions,
                                                      options.stop_indicator_window_m),
                            road_cols);

  InferenceResult result;
  result.velocity = past.velocity;
  const std::size_t windows = window_count(n, dims);
  result.windows.resize(windows);

  VehicleStates feed = past;
  auto run_window = [&](std::size_t w) {
    const std::size_t k = sp + w * stride;
    InferenceWindow win;
    win.origin = k;
    Matrix raw_vehicle(static_cast<Eigen::Index>(sp + 1), dims.vehicle_states);
    for (std::size_t r = 0; r <= sp; ++r) {
      for (std::size_t c = 0; c < layout.vehicle.size(); ++c) {
        raw_vehicle(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            vehicle_value(feed, layout.vehicle[c], k - sp + r);
      }
    }
    win.past_vehicle = scale(raw_vehicle, vehicle_cols);
    win.past_road = road.middleRows(static_cast<Eigen::Index>(k - sp), static_cast<Eigen::Index>(sp + 1));
    win.future_road.resize(static_cast<Eigen::Index>(sf), dims.road_features);
    for (std::size_t r = 0; r < sf; ++r) {
      const std::size_t src = std::min(k + 1 + r, n - 1);
      win.future_road.row(static_cast<Eigen::Index>(r)) = road.row(static_cast<Eigen::Index>(src));
    }
    const Matrix y = inverse_scale(model_forward(win, model.weights, dims), predicted_cols);

    auto& report = result.windows[w];
    report.origin = k;
    report.retained = retain;
    for (std::size_t r = 0; r < retain && k + 1 + r < n; ++r) {
      result.velocity[k + 1 + r] = y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(out_col));
      ++report.written;
    }
  };

  if (options.closed_loop) {
    for (std::size_t w = 0; w < windows; ++w) {
      run_window(w);
      const std::size_t k = sp + w * stride;
      for (std::size_t i = k + 1; i < std::min(k + 1 + retain, n); ++i) {
        feed.velocity[i] = result.velocity[i];
        const double ds = route.interval_after(i - 1);
        feed.acceleration[i] = ds > 0.0 ? feed.velocity[i] * (feed.velocity[i] - feed.velocity[i - 1]) / ds : 0.0;
      }
    }
    return result;
  }

  unsigned workers = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, windows));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t w = next++; w < windows; w = next++) {
          try {
            run_window(w);
          } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

}  // namespace bevroute
