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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bevroute/linalg.hpp"

namespace bevroute {

// Standard-score parameters for one model input. Categorical inputs pass
// through unchanged.
struct FeatureScale {
  std::string name;
  bool categorical = false;
  double mean = 0.0;
  double std_dev = 1.0;
};

struct ScalerParams {
  std::vector<FeatureScale> features;

  const FeatureScale* find(std::string_view name) const noexcept;
  // Throws when a listed feature has no entry.
  const FeatureScale& at(std::string_view name) const;
  std::vector<FeatureScale> columns(std::span<const std::string> names) const;
  void validate() const;
};

// (x - mean) / std per scaled column.
Matrix scale(const Matrix& x, std::span<const FeatureScale> columns);
Matrix inverse_scale(const Matrix& x, std::span<const FeatureScale> columns);

}  // namespace bevroute
