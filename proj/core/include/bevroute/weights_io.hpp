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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bevroute/lstm_model.hpp"

namespace bevroute {

// Weight container (one JSON document):
//
//   {
//     "format": "bevroute.driver_lstm", "version": 1,
//     "dims": {"past_steps": 50, "future_steps": 100, "vehicle_states": 2,
//              "road_features": 12, "predicted_states": 1, "encoder_units": 32,
//              "decoder_units": 64, "stride": 10, "retain": 10},
//     "features": {"vehicle": [...], "road": [...], "predicted": [...]},
//     "fusion_activation": "linear" | "tanh" | "relu",
//     "scaler": {"<feature>": {"mean": m, "std": s} | {"categorical": true}},
//     "tensors": {"<name>": {"shape": [rows, cols] | [n], "values": [row-major]}}
//   }
//
// Tensor names and shapes are listed by tensor_manifest(). LSTM blocks use
// the (input, forget, candidate, output) gate order along their 4u axis.
inline constexpr std::string_view kWeightsFormat = "bevroute.driver_lstm";
inline constexpr int kWeightsVersion = 1;

struct TensorSpec {
  std::string name;
  std::vector<int> shape;
};

std::vector<TensorSpec> tensor_manifest(const ModelDims& dims);

DriverModel load_weights(std::string_view document);
DriverModel load_weights_file(const std::filesystem::path& path);
std::string serialize_weights(const DriverModel& model);

// Feature layout of the shipped synthetic model: velocity and acceleration
// plus twelve road features including two start/stop indicators.
FeatureLayout default_feature_layout();

// Deterministic uniform(-amplitude, amplitude) weights drawn from a
// mt19937_64 stream, with representative scaler statistics.
DriverModel make_synthetic_model(const ModelDims& dims, const FeatureLayout& layout, std::uint64_t seed,
                                 double amplitude = 0.1);

}  // namespace bevroute
