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

#include "bevroute/weights_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bevroute/error.hpp"

namespace bevroute {

namespace {

using nlohmann::json;

void add_lstm(std::vector<TensorSpec>& out, const std::string& prefix, int input, int units) {
  out.push_back({prefix + ".kernel", {input, 4 * units}});
  out.push_back({prefix + ".recurrent_kernel", {units, 4 * units}});
  out.push_back({prefix + ".bias", {4 * units}});
}

void add_dense(std::vector<TensorSpec>& out, const std::string& prefix, int input, int units) {
  out.push_back({prefix + ".kernel", {input, units}});
  out.push_back({prefix + ".bias", {units}});
}

struct RawTensor {
  std::vector<int> shape;
  std::vector<double> values;
};

Matrix to_matrix(const RawTensor& t) {
  const int rows = t.shape.size() == 2 ? t.shape[0] : 1;
  const int cols = t.shape.size() == 2 ? t.shape[1] : t.shape[0];
  Matrix m(rows, cols);
  std::copy(t.values.begin(), t.values.end(), m.data());
  return m;
}

Vector to_vector(const RawTensor& t) { return Eigen::Map<const Vector>(t.values.data(), static_cast<Eigen::Index>(t.values.size())); }

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
  }
  return "linear";
}

Activation parse_activation(const std::string& s) {
  if (s == "linear") return Activation::Linear;
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  throw Error("unknown fusion activation '" + s + "'");
}

int dim_field(const json& dims, const char* key) {
  const auto it = dims.find(key);
  if (it == dims.end() || !it->is_number_integer()) throw Error(std::string("weights: missing dims.") + key);
  return it->get<int>();
}

std::vector<std::string> name_list(const json& features, const char* key) {
  const auto it = features.find(key);
  if (it == features.end() || !it->is_array()) throw Error(std::string("weights: missing features.") + key);
  return it->get<std::vector<std::string>>();
}

// Fills the named tensor slots in a fixed order matching tensor_manifest().
template <typename Fn>
void for_each_slot(ModelWeights& w, Fn&& fn) {
  auto lstm = [&](const std::string& p, GateBlock& g) {
    fn(p + ".kernel", &g.kernel, nullptr);
    fn(p + ".recurrent_kernel", &g.recurrent, nullptr);
    fn(p + ".bias", nullptr, &g.bias);
  };
  auto dense = [&](const std::string& p, DenseLayer& d) {
    fn(p + ".kernel", &d.kernel, nullptr);
    fn(p + ".bias", nullptr, &d.bias);
  };
  lstm("past_encoder.forward", w.past_forward);
  lstm("past_encoder.backward", w.past_backward);
  lstm("future_encoder.forward", w.future_forward);
  lstm("future_encoder.backward", w.future_backward);
  dense("fusion.h.dense1", w.fusion_h1);
  dense("fusion.h.dense2", w.fusion_h2);
  dense("fusion.c.dense1", w.fusion_c1);
  dense("fusion.c.dense2", w.fusion_c2);
  lstm("decoder", w.decoder);
  lstm("output_bilstm.forward", w.output_forward);
  lstm("output_bilstm.backward", w.output_backward);
  dense("output_dense", w.output_dense);
}

void validate_layout(const FeatureLayout& f, const ModelDims& dims) {
  if (static_cast<int>(f.vehicle.size()) != dims.vehicle_states) throw Error("features.vehicle does not match dims");
  if (static_cast<int>(f.road.size()) != dims.road_features) throw Error("features.road does not match dims");
  if (static_cast<int>(f.predicted.size()) != dims.predicted_states) {
    throw Error("features.predicted does not match dims");
  }
  for (const auto& p : f.predicted) {
    if (std::find(f.vehicle.begin(), f.vehicle.end(), p) == f.vehicle.end()) {
      throw Error("predicted feature '" + p + "' is not a vehicle feature");
    }
  }
}

}  // namespace

std::vector<TensorSpec> tensor_manifest(const ModelDims& d) {
  std::vector<TensorSpec> out;
  const int ue = d.encoder_units;
  const int ud = d.decoder_units;
  add_lstm(out, "past_encoder.forward", d.vehicle_states + d.road_features, ue);
  add_lstm(out, "past_encoder.backward", d.vehicle_states + d.road_features, ue);
  add_lstm(out, "future_encoder.forward", d.road_features, ue);
  add_lstm(out, "future_encoder.backward", d.road_features, ue);
  add_dense(out, "fusion.h.dense1", 4 * ue, 2 * ue);
  add_dense(out, "fusion.h.dense2", 2 * ue, ud);
  add_dense(out, "fusion.c.dense1", 4 * ue, 2 * ue);
  add_dense(out, "fusion.c.dense2", 2 * ue, ud);
  add_lstm(out, "decoder", ud, ud);
  add_lstm(out, "output_bilstm.forward", ud, ud);
  add_lstm(out, "output_bilstm.backward", ud, ud);
  add_dense(out, "output_dense", 2 * ud, d.predicted_states);
  return out;
}

namespace {

DriverModel load_weights_impl(const json& doc) {
  if (!doc.is_object() || doc.value("format", "") != kWeightsFormat) throw Error("weights: not a driver_lstm container");
  if (doc.value("version", 0) != kWeightsVersion) throw Error("weights: unsupported container version");

  DriverModel model;
  const auto& dims = doc.at("dims");
  auto& d = model.dims;
  d.past_steps = dim_field(dims, "past_steps");
  d.future_steps = dim_field(dims, "future_steps");
  d.vehicle_states = dim_field(dims, "vehicle_states");
  d.road_features = dim_field(dims, "road_features");
  d.predicted_states = dim_field(dims, "predicted_states");
  d.encoder_units = dim_field(dims, "encoder_units");
  d.decoder_units = dim_field(dims, "decoder_units");
  d.stride = dim_field(dims, "stride");
  d.retain = dim_field(dims, "retain");
  d.validate();

  if (!doc.contains("features")) throw Error("weights: missing features");
  model.features.vehicle = name_list(doc["features"], "vehicle");
  model.features.road = name_list(doc["features"], "road");
  model.features.predicted = name_list(doc["features"], "predicted");
  validate_layout(model.features, d);
  model.weights.fusion_activation = parse_activation(doc.value("fusion_activation", std::string("linear")));

  const auto scaler = doc.find("scaler");
  if (scaler == doc.end() || !scaler->is_object()) throw Error("weights: missing scaler");
  std::vector<std::string> all = model.features.vehicle;
  all.insert(all.end(), model.features.road.begin(), model.features.road.end());
  for (const auto& name : all) {
    const auto it = scaler->find(name);
    if (it == scaler->end()) throw Error("weights: missing scaler for feature '" + name + "'");
    FeatureScale fs;
    fs.name = name;
    fs.categorical = it->value("categorical", false);
    if (!fs.categorical) {
      if (!it->contains("mean") || !it->contains("std")) throw Error("weights: missing scaler for feature '" + name + "'");
      fs.mean = it->at("mean").get<double>();
      fs.std_dev = it->at("std").get<double>();
    }
    model.scaler.features.push_back(fs);
  }
  try {
    model.scaler.validate();
  } catch (const Error& e) {
    throw Error(std::string("weights: ") + e.what());
  }

  const auto tensors = doc.find("tensors");
  if (tensors == doc.end() || !tensors->is_object()) throw Error("weights: missing tensors");
  std::map<std::string, std::vector<int>> expected;
  for (const auto& spec : tensor_manifest(d)) expected.emplace(spec.name, spec.shape);
  for (const auto& [name, _] : tensors->items()) {
    if (!expected.contains(name)) throw Error("weights: unknown tensor '" + name + "'");
  }

  for_each_slot(model.weights, [&](const std::string& name, Matrix* m, Vector* v) {
    const auto it = tensors->find(name);
    if (it == tensors->end()) throw Error("weights: missing tensor '" + name + "'");
    RawTensor raw;
    raw.shape = it->at("shape").get<std::vector<int>>();
    raw.values = it->at("values").get<std::vector<double>>();
    const auto& want = expected.at(name);
    if (raw.shape != want) {
      std::ostringstream msg;
      msg << "weights: tensor '" << name << "' has shape [";
      for (std::size_t i = 0; i < raw.shape.size(); ++i) msg << (i ? "," : "") << raw.shape[i];
      msg << "], expected [";
      for (std::size_t i = 0; i < want.size(); ++i) msg << (i ? "," : "") << want[i];
      msg << "]";
      throw Error(msg.str());
    }
    std::size_t count = 1;
    for (int s : raw.shape) count *= static_cast<std::size_t>(s);
    if (raw.values.size() != count) throw Error("weights: tensor '" + name + "' has wrong number of values");
    for (double x : raw.values) {
      if (!std::isfinite(x)) throw Error("weights: non-finite value in tensor '" + name + "'");
    }
    if (m != nullptr) *m = to_matrix(raw);
    if (v != nullptr) *v = to_vector(raw);
  });
  return model;
}

}  // namespace

DriverModel load_weights(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::exception& e) {
    throw Error(std::string("weights: malformed JSON: ") + e.what());
  }
  try {
    return load_weights_impl(doc);
  } catch (const json::exception& e) {
    throw Error(std::string("weights: ") + e.what());
  }
}

DriverModel load_weights_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("weights file not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_weights(buf.str());
}

std::string serialize_weights(const DriverModel& model) {
  const auto& d = model.dims;
  json doc;
  doc["format"] = kWeightsFormat;
  doc["version"] = kWeightsVersion;
  doc["dims"] = {{"past_steps", d.past_steps},         {"future_steps", d.future_steps},
                 {"vehicle_states", d.vehicle_states}, {"road_features", d.road_features},
                 {"predicted_states", d.predicted_states}, {"encoder_units", d.encoder_units},
                 {"decoder_units", d.decoder_units},   {"stride", d.stride},
                 {"retain", d.retain}};
  doc["features"] = {{"vehicle", model.features.vehicle},
                     {"road", model.features.road},
                     {"predicted", model.features.predicted}};
  doc["fusion_activation"] = activation_name(model.weights.fusion_activation);
  json scaler = json::object();
  for (const auto& f : model.scaler.features) {
    scaler[f.name] = f.categorical ? json{{"categorical", true}} : json{{"mean", f.mean}, {"std", f.std_dev}};
  }
  doc["scaler"] = scaler;

  json tensors = json::object();
  auto weights = model.weights;
  for_each_slot(weights, [&](const std::string& name, Matrix* m, Vector* v) {
    json t;
    if (m != nullptr) {
      t["shape"] = {m->rows(), m->cols()};
      t["values"] = std::vector<double>(m->data(), m->data() + m->size());
    } else {
      t["shape"] = {v->size()};
      t["values"] = std::vector<double>(v->data(), v->data() + v->size());
    }
    tensors[name] = std::move(t);
  });
  doc["tensors"] = std::move(tensors);
  return doc.dump();
}

FeatureLayout default_feature_layout() {
  FeatureLayout f;
  f.vehicle = {"velocity", "acceleration"};
  f.road = {"elevation",   "heading",         "speed_limit", "avg_edge_speed",  "curvature",       "traffic_signal",
            "stop_yield_sign", "roundabout", "edge_class",  "link",            "approaching_stop", "departing_stop"};
  f.predicted = {"velocity"};
  return f;
}

DriverModel make_synthetic_model(const ModelDims& dims, const FeatureLayout& layout, std::uint64_t seed,
                                 double amplitude) {
  dims.validate();
  validate_layout(layout, dims);
  DriverModel model;
  model.dims = dims;
  model.features = layout;

  // Raw engine output is specified by the standard, unlike the distributions.
  std::mt19937_64 rng(seed);
  auto draw = [&] {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return amplitude * (2.0 * unit - 1.0);
  };
  const std::map<std::string, std::pair<double, double>> stats{
      {"velocity", {12.0, 6.0}},      {"acceleration", {0.0, 0.8}}, {"elevation", {200.0, 60.0}},
      {"heading", {180.0, 104.0}},    {"speed_limit", {15.0, 6.0}}, {"avg_edge_speed", {13.0, 5.0}},
      {"curvature", {4.0, 8.0}},      {"grade", {0.0, 3.0}},        {"heading_change", {5.0, 15.0}},
      {"edge_position", {0.5, 0.29}},
  };
  std::vector<std::string> all = layout.vehicle;
  all.insert(all.end(), layout.road.begin(), layout.road.end());
  for (const auto& name : all) {
    FeatureScale fs;
    fs.name = name;
    if (const auto it = stats.find(name); it != stats.end()) {
      fs.mean = it->second.first;
      fs.std_dev = it->second.second;
    } else {
      fs.categorical = true;
    }
    model.scaler.features.push_back(fs);
  }

  const auto manifest = tensor_manifest(dims);
  std::size_t k = 0;
  for_each_slot(model.weights, [&](const std::string&, Matrix* m, Vector* v) {
    const auto& shape = manifest[k++].shape;
    if (m != nullptr) {
      m->resize(shape[0], shape[1]);
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = draw();
    } else {
      v->resize(shape[0]);
      for (Eigen::Index i = 0; i < v->size(); ++i) (*v)[i] = draw();
    }
  });
  return model;
}

}  // namespace bevroute
