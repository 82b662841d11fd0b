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

#include "bevroute/feature_scaling.hpp"

#include <cmath>

#include "bevroute/error.hpp"

namespace bevroute {

namespace {

void check_columns(const Matrix& x, std::span<const FeatureScale> columns) {
  if (static_cast<std::size_t>(x.cols()) != columns.size()) {
    throw Error("feature matrix has " + std::to_string(x.cols()) + " columns, expected " +
                std::to_string(columns.size()));
  }
}

}  // namespace

const FeatureScale* ScalerParams::find(std::string_view name) const noexcept {
  for (const auto& f : features) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const FeatureScale& ScalerParams::at(std::string_view name) const {
  if (const auto* f = find(name)) return *f;
  throw Error("missing scaler for feature '" + std::string(name) + "'");
}

std::vector<FeatureScale> ScalerParams::columns(std::span<const std::string> names) const {
  std::vector<FeatureScale> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(at(n));
  return out;
}

void ScalerParams::validate() const {
  for (const auto& f : features) {
    if (f.categorical) continue;
    if (!std::isfinite(f.mean) || !std::isfinite(f.std_dev)) throw Error("non-finite scaler for '" + f.name + "'");
    if (!(f.std_dev > 0.0)) throw Error("degenerate scaler for '" + f.name + "' (std must be > 0)");
  }
}

Matrix scale(const Matrix& x, std::span<const FeatureScale> columns) {
  check_columns(x, columns);
  Matrix out = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const auto& f = columns[static_cast<std::size_t>(c)];
    if (f.categorical) continue;
    out.col(c) = (x.col(c).array() - f.mean) / f.std_dev;
  }
  return out;
}

Matrix inverse_scale(const Matrix& x, std::span<const FeatureScale> columns) {
  check_columns(x, columns);
  Matrix out = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const auto& f = columns[static_cast<std::size_t>(c)];
    if (f.categorical) continue;
    out.col(c) = x.col(c).array() * f.std_dev + f.mean;
  }
  return out;
}

}  // namespace bevroute
