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
#include <vector>

namespace bevroute {

struct FilterConfig {
  double cutoff = 0.05;  // fraction of Nyquist on the 1 m grid

  void validate() const;
};

struct FirstOrderCoefficients {
  double b0 = 0.0;
  double b1 = 0.0;
  double a1 = 0.0;  // denominator is 1 + a1 z^-1
};

// Bilinear-transform Butterworth low-pass with a pre-warped cutoff.
FirstOrderCoefficients butterworth_first_order(double cutoff);

// Forward-backward application of the first-order low-pass. The signal is
// extended at both ends by odd reflection (3 samples) and each pass starts
// from the steady state of its first input sample.
std::vector<double> zero_phase_filter(std::span<const double> signal, const FilterConfig& cfg = {});

}  // namespace bevroute
