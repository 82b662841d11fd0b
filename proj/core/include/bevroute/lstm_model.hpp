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
#include <string>
#include <vector>

#include "bevroute/feature_scaling.hpp"
#include "bevroute/linalg.hpp"

namespace bevroute {

struct ModelDims {
  int past_steps = 50;        // s_P; the past window holds s_P + 1 rows
  int future_steps = 100;     // s_F
  int vehicle_states = 2;     // n_v
  int road_features = 12;     // n_r
  int predicted_states = 1;   // q_v
  int encoder_units = 32;     // u_e
  int decoder_units = 64;     // u_d
  int stride = 10;
  int retain = 10;

  void validate() const;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

// Parameters of one LSTM direction, Keras layout: kernel is input x 4u,
// recurrent is u x 4u, gates ordered (input, forget, candidate, output).
struct GateBlock {
  Matrix kernel;
  Matrix recurrent;
  Vector bias;

  Eigen::Index units() const noexcept { return recurrent.rows(); }
  Eigen::Index input_size() const noexcept { return kernel.rows(); }
};

// y = kernel^T x + bias, kernel is input x output.
struct DenseLayer {
  Matrix kernel;
  Vector bias;
};

enum class Activation { Linear, Tanh, Relu };

struct ModelWeights {
  GateBlock past_forward;
  GateBlock past_backward;
  GateBlock future_forward;
  GateBlock future_backward;
  DenseLayer fusion_h1;  // 4u_e -> 2u_e
  DenseLayer fusion_h2;  // 2u_e -> u_d
  DenseLayer fusion_c1;
  DenseLayer fusion_c2;
  GateBlock decoder;     // input u_d, units u_d
  GateBlock output_forward;
  GateBlock output_backward;
  DenseLayer output_dense;  // 2u_d -> q_v
  Activation fusion_activation = Activation::Linear;
};

struct FeatureLayout {
  std::vector<std::string> vehicle;    // n_v names, e.g. velocity, acceleration
  std::vector<std::string> road;       // n_r names
  std::vector<std::string> predicted;  // q_v names, a subset of vehicle
};

struct DriverModel {
  ModelDims dims;
  FeatureLayout features;
  ScalerParams scaler;
  ModelWeights weights;
};

struct LstmState {
  Vector h;
  Vector c;
};

LstmState lstm_cell_step(const Vector& x, const Vector& h, const Vector& c, const GateBlock& p);

struct BiLstmOutput {
  Matrix outputs;  // T x 2u, row t = [forward_t, backward_t]
  LstmState forward;
  LstmState backward;
};

BiLstmOutput bilstm_layer(const Matrix& sequence, const GateBlock& forward, const GateBlock& backward);

// Inputs for one prediction. Rows are already scaled.
struct InferenceWindow {
  Matrix past_vehicle;  // (s_P + 1) x n_v
  Matrix past_road;     // (s_P + 1) x n_r
  Matrix future_road;   // s_F x n_r
  std::size_t origin = 0;
};

// Encoder-decoder forward pass; returns s_F x q_v predictions in scaled units.
Matrix model_forward(const InferenceWindow& window, const ModelWeights& w, const ModelDims& dims);

}  // namespace bevroute
