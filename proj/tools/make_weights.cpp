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

// Writes a driver model container with deterministic synthetic weights.

#include <cstdint>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "bevroute/weights_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic driver model weight container"};
  std::string out_path;
  std::uint64_t seed = 20260415;
  double amplitude = 0.1;
  bool zero = false;
  app.add_option("--out", out_path, "Output JSON file")->required();
  app.add_option("--seed", seed, "mt19937_64 seed")->capture_default_str();
  app.add_option("--amplitude", amplitude, "Uniform weight range (-a, a)")->capture_default_str();
  app.add_flag("--zero", zero, "Write all-zero tensors");
  CLI11_PARSE(app, argc, argv);

  try {
    auto model = bevroute::make_synthetic_model(bevroute::ModelDims{}, bevroute::default_feature_layout(), seed,
                                                zero ? 0.0 : amplitude);
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
      std::cerr << "cannot open " << out_path << '\n';
      return 1;
    }
    out << bevroute::serialize_weights(model) << '\n';
    return out ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
}
