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

#include "bevroute/zero_phase_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bevroute/error.hpp"

namespace bevroute {

namespace {

constexpr std::size_t kFilterOrder = 1;
constexpr std::size_t kPadding = 3 * kFilterOrder;

void run_pass(std::vector<double>& x, const FirstOrderCoefficients& c) {
  const double zi = (c.b1 - c.a1 * c.b0) / (1.0 + c.a1);
  double z = zi * x.front();
  for (double& sample : x) {
    const double y = c.b0 * sample + z;
    z = c.b1 * sample - c.a1 * y;
    sample = y;
  }
}

}  // namespace

void FilterConfig::validate() const {
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw Error("filter cutoff must lie in (0, 1)");
}

FirstOrderCoefficients butterworth_first_order(double cutoff) {
  FilterConfig{cutoff}.validate();
  const double k = std::tan(std::numbers::pi * cutoff / 2.0);
  FirstOrderCoefficients c;
  c.b0 = k / (1.0 + k);
  c.b1 = c.b0;
  c.a1 = (k - 1.0) / (k + 1.0);
  return c;
}

std::vector<double> zero_phase_filter(std::span<const double> signal, const FilterConfig& cfg) {
  const auto coeffs = butterworth_first_order(cfg.cutoff);
  const std::size_t n = signal.size();
  if (n <= kPadding) throw Error("signal too short for zero-phase filtering");

  std::vector<double> ext;
  ext.reserve(n + 2 * kPadding);
  for (std::size_t i = kPadding; i >= 1; --i) ext.push_back(2.0 * signal.front() - signal[i]);
  ext.insert(ext.end(), signal.begin(), signal.end());
  for (std::size_t i = 1; i <= kPadding; ++i) ext.push_back(2.0 * signal.back() - signal[n - 1 - i]);

  run_pass(ext, coeffs);
  std::reverse(ext.begin(), ext.end());
  run_pass(ext, coeffs);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(kPadding),
          ext.begin() + static_cast<std::ptrdiff_t>(kPadding + n)};
}

}  // namespace bevroute
