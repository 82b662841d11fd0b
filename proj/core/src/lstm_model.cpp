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

#include "bevroute/lstm_model.hpp"

#include <cmath>
#include <string>

#include "bevroute/error.hpp"

namespace bevroute {

namespace {

Vector sigmoid(const Vector& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

Vector dense(const DenseLayer& layer, const Vector& x, Activation act) {
  Vector y = layer.kernel.transpose() * x + layer.bias;
  switch (act) {
    case Activation::Linear: break;
    case Activation::Tanh: y = y.array().tanh().matrix(); break;
    case Activation::Relu: y = y.cwiseMax(0.0); break;
  }
  return y;
}

void expect_rows(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(std::string(what) + " has shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

void ModelDims::validate() const {
  if (past_steps < 1 || future_steps < 1 || vehicle_states < 1 || road_features < 1 || predicted_states < 1 ||
      encoder_units < 1 || decoder_units < 1 || stride < 1 || retain < 1) {
    throw Error("model dimensions must be positive");
  }
  if (!(retain <= stride && stride <= future_steps)) throw Error("model dims require retain <= stride <= future_steps");
  if (predicted_states > vehicle_states) throw Error("model dims require predicted_states <= vehicle_states");
}

LstmState lstm_cell_step(const Vector& x, const Vector& h, const Vector& c, const GateBlock& p) {
  const Eigen::Index u = p.units();
  if (x.size() != p.input_size() || h.size() != u || c.size() != u || p.kernel.cols() != 4 * u ||
      p.recurrent.cols() != 4 * u || p.bias.size() != 4 * u) {
    throw Error("lstm_cell_step: inconsistent shapes");
  }
  const Vector z = p.kernel.transpose() * x + p.recurrent.transpose() * h + p.bias;
  const Vector i = sigmoid(z.segment(0, u));
  const Vector f = sigmoid(z.segment(u, u));
  const Vector g = z.segment(2 * u, u).array().tanh().matrix();
  const Vector o = sigmoid(z.segment(3 * u, u));
  LstmState next;
  next.c = f.cwiseProduct(c) + i.cwiseProduct(g);
  next.h = o.cwiseProduct(next.c.array().tanh().matrix());
  return next;
}

BiLstmOutput bilstm_layer(const Matrix& sequence, const GateBlock& forward, const GateBlock& backward) {
  if (sequence.rows() < 1) throw Error("bilstm_layer: empty sequence");
  const Eigen::Index steps = sequence.rows();
  const Eigen::Index uf = forward.units();
  const Eigen::Index ub = backward.units();

  BiLstmOutput out;
  out.outputs.resize(steps, uf + ub);
  out.forward = {Vector::Zero(uf), Vector::Zero(uf)};
  for (Eigen::Index t = 0; t < steps; ++t) {
    out.forward = lstm_cell_step(sequence.row(t).transpose(), out.forward.h, out.forward.c, forward);
    out.outputs.row(t).head(uf) = out.forward.h.transpose();
  }
  out.backward = {Vector::Zero(ub), Vector::Zero(ub)};
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    out.backward = lstm_cell_step(sequence.row(t).transpose(), out.backward.h, out.backward.c, backward);
    out.outputs.row(t).tail(ub) = out.backward.h.transpose();
  }
  return out;
}

Matrix model_forward(const InferenceWindow& window, const ModelWeights& w, const ModelDims& dims) {
  const Eigen::Index past_rows = dims.past_steps + 1;
  expect_rows(window.past_vehicle, past_rows, dims.vehicle_states, "past vehicle window");
  expect_rows(window.past_road, past_rows, dims.road_features, "past road window");
  expect_rows(window.future_road, dims.future_steps, dims.road_features, "future road window");

  // Past driving encoder over [vehicle | road].
  Matrix past(past_rows, dims.vehicle_states + dims.road_features);
  past << window.past_vehicle, window.past_road;
  const auto past_enc = bilstm_layer(past, w.past_forward, w.past_backward);
  const auto future_enc = bilstm_layer(window.future_road, w.future_forward, w.future_backward);

  // State fusion: [h^P ; h^F] -> dense(2u_e) -> dense(u_d), same for cells.
  const Eigen::Index ue = dims.encoder_units;
  Vector h_pf(4 * ue);
  Vector c_pf(4 * ue);
  h_pf << past_enc.forward.h, past_enc.backward.h, future_enc.forward.h, future_enc.backward.h;
  c_pf << past_enc.forward.c, past_enc.backward.c, future_enc.forward.c, future_enc.backward.c;
  const Vector h_d = dense(w.fusion_h2, dense(w.fusion_h1, h_pf, w.fusion_activation), w.fusion_activation);
  const Vector c_d = dense(w.fusion_c2, dense(w.fusion_c1, c_pf, w.fusion_activation), w.fusion_activation);

  // Autoregressive decoder: the first input is h^D, later inputs are the
  // previous step's hidden output.
  Matrix decoded(dims.future_steps, dims.decoder_units);
  LstmState st{h_d, c_d};
  Vector input = h_d;
  for (Eigen::Index t = 0; t < dims.future_steps; ++t) {
    st = lstm_cell_step(input, st.h, st.c, w.decoder);
    decoded.row(t) = st.h.transpose();
    input = st.h;
  }

  const auto refined = bilstm_layer(decoded, w.output_forward, w.output_backward);
  Matrix y = refined.outputs * w.output_dense.kernel;
  y.rowwise() += w.output_dense.bias.transpose();
  return y;
}

}  // namespace bevroute
