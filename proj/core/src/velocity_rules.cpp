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

#include "bevroute/velocity_rules.hpp"

#include <cmath>

#include "bevroute/error.hpp"

namespace bevroute {

namespace {

constexpr double kEdgeEndTol = 1e-6;

NodeClass classify_moving(const RoadFeatures& f, const RuleThresholds& t) noexcept {
  if (f.curvature > t.curvature) return {f.avg_edge_speed, LimitType::Curve};
  return {f.speed_limit, LimitType::Default};
}

}  // namespace

void RuleThresholds::validate() const {
  if (!(heading_change_deg > 0.0)) throw Error("heading_change threshold must be positive");
  if (!(curvature > 0.0)) throw Error("curvature threshold must be positive");
  if (!(stop_merge_window_m >= 0.0)) throw Error("stop merge window must be non-negative");
}

NodeClass classify_node(const RoadFeatures& f, const RuleThresholds& t) noexcept {
  if (f.traffic_signal || f.stop_sign || f.yield_sign) return {0.0, LimitType::Stop};
  const bool sharp_turn = f.heading_change > t.heading_change_deg;
  if (sharp_turn && std::abs(f.edge_position) <= kEdgeEndTol) return {0.0, LimitType::Stop};
  if (sharp_turn && std::abs(f.edge_position - 1.0) <= kEdgeEndTol) return {0.0, LimitType::Stop};
  return classify_moving(f, t);
}

std::vector<ReferencePoint> build_reference_profile(const DiscretizedRoute& route, const RuleThresholds& t) {
  t.validate();
  if (!route.has_features) throw Error("route has no features attached");

  std::vector<ReferencePoint> profile;
  profile.reserve(route.size());
  for (const auto& step : route.steps) {
    const auto c = classify_node(step.features, t);
    profile.push_back({step.arc_length, c.v_ref, c.limit_type});
  }

  std::size_t i = 0;
  while (i < profile.size()) {
    if (profile[i].limit_type != LimitType::Stop) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < profile.size() && profile[end].limit_type == LimitType::Stop &&
           profile[end].arc_length - profile[end - 1].arc_length <= t.stop_merge_window_m) {
      ++end;
    }
    const std::size_t keep = i + (end - 1 - i) / 2;
    for (std::size_t k = i; k < end; ++k) {
      if (k == keep) continue;
      const auto c = classify_moving(route.steps[k].features, t);
      profile[k].v_ref = c.v_ref;
      profile[k].limit_type = c.limit_type;
    }
    i = end;
  }
  return profile;
}

std::vector<double> stop_positions(const std::vector<ReferencePoint>& profile) {
  std::vector<double> out;
  for (const auto& p : profile) {
    if (p.limit_type == LimitType::Stop) out.push_back(p.arc_length);
  }
  return out;
}

}  // namespace bevroute
