// Copyright 2026 The CRG Explainer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "crg/model_zoo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include <json.hpp>

namespace crg {

namespace {

constexpr std::size_t kKernel = 3;
constexpr std::size_t kConvChannels = 4;
constexpr std::size_t kHidden = 16;
constexpr std::size_t kHiddenMaps = 4;
constexpr std::size_t kHiddenSide = 2;

bool is_cnn(Architecture arch) { return arch != Architecture::MlpSmooth; }

struct TensorSpec {
  std::string name;
  Shape shape;
  std::size_t fan_in;
};

std::vector<TensorSpec> tensor_specs(Architecture arch, std::size_t num_classes, const InputSpec& in) {
  if (is_cnn(arch)) {
    const std::size_t fan = in.channels * kKernel * kKernel;
    return {{"conv.weight", {kConvChannels, in.channels, kKernel, kKernel}, fan},
            {"conv.bias", {kConvChannels}, fan},
            {"fc.weight", {num_classes, kConvChannels}, kConvChannels},
            {"fc.bias", {num_classes}, kConvChannels}};
  }
  const std::size_t flat = in.channels * in.height * in.width;
  return {{"fc1.weight", {kHidden, flat}, flat},
          {"fc1.bias", {kHidden}, flat},
          {"fc2.weight", {num_classes, kHidden}, kHidden},
          {"fc2.bias", {num_classes}, kHidden}};
}

std::vector<LayerInfo> layer_list(Architecture arch) {
  switch (arch) {
    case Architecture::CnnRelu:
      return {{"conv", "conv2d"}, {"act", "relu"}, {"gap", "global_avg_pool"}, {"fc", "linear"}};
    case Architecture::CnnSmooth:
      return {{"conv", "conv2d"}, {"act", "silu"}, {"gap", "global_avg_pool"}, {"fc", "linear"}};
    case Architecture::MlpSmooth:
      return {{"flatten", "reshape"}, {"hidden", "linear"}, {"act", "tanh"}, {"fc2", "linear"}};
  }
  return {};
}

ad::Var linear(ad::Var x, ad::Tape& tape, const Tensor& w, const Tensor& b) {
  const std::size_t features = x.value().size();
  const ad::Var col = ad::reshape(x, {features, 1});
  const ad::Var out = ad::matmul(tape.constant(w), col);
  return ad::add(ad::reshape(out, {w.shape()[0]}), tape.constant(b));
}

void validate_input(const ToyModel& model, const Tensor& image) {
  if (image.shape() != model.input.shape()) {
    throw ShapeError("model expects input " + to_string(model.input.shape()) + ", got " + to_string(image.shape()));
  }
}

/// Pre-tap graph from image to the tap output, shaped [N, h, w].
ad::Var pre_tap(const ToyModel& model, ad::Var image) {
  ad::Tape& tape = image.tape();
  if (is_cnn(model.arch)) {
    ad::Var z = ad::conv2d(image, tape.constant(model.weight("conv.weight")), 0);
    z = ad::add_channel_bias(z, tape.constant(model.weight("conv.bias")));
    if (model.tap == "conv") return z;
    return model.arch == Architecture::CnnRelu ? ad::relu(z) : ad::silu(z);
  }
  const ad::Var flat = ad::reshape(image, {numel(image.shape())});
  ad::Var h = linear(flat, tape, model.weight("fc1.weight"), model.weight("fc1.bias"));
  if (model.tap == "act") h = ad::tanh(h);
  return ad::reshape(h, {kHiddenMaps, kHiddenSide, kHiddenSide});
}

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64_le(std::string_view in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

std::string payload_bytes(const ToyModel& model) {
  std::string out;
  for (const auto& [name, t] : model.weights) {
    for (std::size_t k = 0; k < t.size(); ++k) put_u64_le(out, std::bit_cast<std::uint64_t>(t[k]));
  }
  return out;
}

}  // namespace

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::CnnRelu: return "cnn-relu";
    case Architecture::CnnSmooth: return "cnn-smooth";
    case Architecture::MlpSmooth: return "mlp-smooth";
  }
  return "unknown";
}

Architecture parse_architecture(std::string_view name) {
  if (name == "cnn-relu") return Architecture::CnnRelu;
  if (name == "cnn-smooth") return Architecture::CnnSmooth;
  if (name == "mlp-smooth") return Architecture::MlpSmooth;
  throw std::invalid_argument("unknown architecture '" + std::string(name) + "'");
}

const Tensor& ToyModel::weight(std::string_view name) const {
  for (const auto& [n, t] : weights) {
    if (n == name) return t;
  }
  throw std::out_of_range("model has no tensor '" + std::string(name) + "'");
}

ToyModel build_model(Architecture arch, std::size_t num_classes, std::uint64_t seed, InputSpec input) {
  if (num_classes < 1) throw std::invalid_argument("build_model: num_classes must be >= 1");
  if (input.channels == 0 || input.height < kKernel || input.width < kKernel) {
    throw std::invalid_argument("build_model: input must be at least 1x3x3");
  }
  ToyModel model;
  model.arch = arch;
  model.num_classes = num_classes;
  model.seed = seed;
  model.input = input;
  model.tap = default_tap(arch);
  model.layers = layer_list(arch);

  std::mt19937_64 rng(seed);
  for (const TensorSpec& spec : tensor_specs(arch, num_classes, input)) {
    Tensor t(spec.shape);
    const double s = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
      t[k] = (u - 0.5) * s;
    }
    model.weights.emplace_back(spec.name, std::move(t));
  }
  return model;
}

std::vector<std::string> available_taps(Architecture arch) {
  if (is_cnn(arch)) return {"act", "conv"};
  return {"hidden", "act"};
}

std::string default_tap(Architecture arch) { return is_cnn(arch) ? "act" : "hidden"; }

void select_tap(ToyModel& model, std::string_view tap) {
  if (tap == "auto") {
    model.tap = default_tap(model.arch);
    return;
  }
  const auto taps = available_taps(model.arch);
  if (std::find(taps.begin(), taps.end(), tap) == taps.end()) {
    throw std::invalid_argument("architecture " + to_string(model.arch) + " has no tap '" + std::string(tap) + "'");
  }
  model.tap = std::string(tap);
}

bool tap_precedes_gap(const ToyModel& model) { return is_cnn(model.arch) && model.tap == "act"; }

Shape tap_shape(const ToyModel& model) {
  if (is_cnn(model.arch)) {
    return {kConvChannels, model.input.height - kKernel + 1, model.input.width - kKernel + 1};
  }
  return {kHiddenMaps, kHiddenSide, kHiddenSide};
}

ad::Var post_tap_logits(const ToyModel& model, ad::Var tap) {
  if (tap.shape() != tap_shape(model)) {
    throw ShapeError("tap value has shape " + to_string(tap.shape()) + ", expected " + to_string(tap_shape(model)));
  }
  ad::Tape& tape = tap.tape();
  ad::Var logits;
  if (is_cnn(model.arch)) {
    ad::Var a = tap;
    if (model.tap == "conv") a = model.arch == Architecture::CnnRelu ? ad::relu(a) : ad::silu(a);
    logits = linear(ad::global_avg_pool(a), tape, model.weight("fc.weight"), model.weight("fc.bias"));
  } else {
    ad::Var h = ad::reshape(tap, {kHidden});
    if (model.tap == "hidden") h = ad::tanh(h);
    logits = linear(h, tape, model.weight("fc2.weight"), model.weight("fc2.bias"));
  }
  if (model.logit_scale != 1.0) logits = ad::scale(logits, model.logit_scale);
  return logits;
}

ad::Var model_logits(const ToyModel& model, ad::Var image) {
  validate_input(model, image.value());
  return post_tap_logits(model, pre_tap(model, image));
}

Tensor predict(const ToyModel& model, const Tensor& image) {
  validate_input(model, image);
  ad::Tape tape;
  return post_tap_logits(model, pre_tap(model, tape.input("image", image))).value();
}

TapForward forward_with_tap(const ToyModel& model, const Tensor& image) {
  validate_input(model, image);
  TapForward out;
  out.tape = std::make_unique<ad::Tape>();
  const ad::Var pre = pre_tap(model, out.tape->input("image", image));
  out.tap = out.tape->input("tap", pre.value());
  out.logits = post_tap_logits(model, out.tap);
  out.activations = ActivationStack::from_tensor(pre.value());
  return out;
}

std::string serialize_weights(const ToyModel& model) {
  nlohmann::json header;
  header["arch"] = to_string(model.arch);
  header["num_classes"] = model.num_classes;
  header["seed"] = model.seed;
  header["input"] = {model.input.channels, model.input.height, model.input.width};
  header["tap"] = model.tap;
  header["logit_scale"] = model.logit_scale;
  nlohmann::json tensors = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& [name, t] : model.weights) {
    tensors.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += 8 * t.size();
  }
  header["tensors"] = tensors;
  const std::string text = header.dump();
  std::string out;
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xffu));
  out += text;
  out += payload_bytes(model);
  return out;
}

ToyModel deserialize_weights(std::string_view bytes) {
  if (bytes.size() < 4) throw ManifestError("weight file shorter than its 4-byte header length");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  if (bytes.size() < 4 + static_cast<std::size_t>(len)) throw ManifestError("weight file truncated inside header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(4, len));
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(std::string("malformed weight header: ") + e.what());
  }
  const std::string_view payload = bytes.substr(4 + len);

  ToyModel model;
  try {
    const auto in = header.at("input").get<std::vector<std::size_t>>();
    if (in.size() != 3) throw ManifestError("header 'input' must list channels, height, width");
    model = build_model(parse_architecture(header.at("arch").get<std::string>()),
                        header.at("num_classes").get<std::size_t>(), header.at("seed").get<std::uint64_t>(),
                        InputSpec{in[0], in[1], in[2]});
    select_tap(model, header.at("tap").get<std::string>());
    model.logit_scale = header.value("logit_scale", 1.0);
  } catch (const ManifestError&) {
    throw;
  } catch (const std::exception& e) {
    throw ManifestError(std::string("invalid weight header: ") + e.what());
  }

  std::size_t expected_offset = 0;
  try {
    const auto& tensors = header.at("tensors");
    if (!tensors.is_array() || tensors.size() != model.weights.size()) {
      throw ManifestError("header lists " + std::to_string(tensors.size()) + " tensors, architecture " +
                          to_string(model.arch) + " has " + std::to_string(model.weights.size()));
    }
    for (std::size_t k = 0; k < tensors.size(); ++k) {
      auto& [name, t] = model.weights[k];
      const auto& entry = tensors[k];
      const std::string listed = entry.at("name").get<std::string>();
      if (listed != name) throw ManifestError("tensor " + std::to_string(k) + " is '" + listed + "', expected '" + name + "'");
      const auto shape = entry.at("shape").get<Shape>();
      const auto offset = entry.at("offset").get<std::size_t>();
      if (shape != t.shape()) {
        throw ManifestError("tensor '" + name + "': header shape " + to_string(shape) + " (" +
                            std::to_string(numel(shape)) + " elements) does not match architecture shape " +
                            to_string(t.shape()));
      }
      if (offset != expected_offset) {
        throw ManifestError("tensor '" + name + "': offset " + std::to_string(offset) + " does not follow previous tensor (expected " +
                            std::to_string(expected_offset) + ")");
      }
      const std::size_t span = 8 * numel(shape);
      if (offset + span > payload.size()) {
        throw ManifestError("tensor '" + name + "': payload truncated (needs bytes [" + std::to_string(offset) + ", " +
                            std::to_string(offset + span) + "), payload has " + std::to_string(payload.size()) + ")");
      }
      for (std::size_t e = 0; e < t.size(); ++e) t[e] = std::bit_cast<double>(get_u64_le(payload, offset + 8 * e));
      if (!t.all_finite()) throw ManifestError("tensor '" + name + "' contains non-finite values");
      expected_offset = offset + span;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(std::string("invalid tensor table: ") + e.what());
  }
  if (expected_offset != payload.size()) {
    throw ManifestError("payload has " + std::to_string(payload.size() - expected_offset) + " trailing bytes");
  }
  return model;
}

void save_weights(const ToyModel& model, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ManifestError("cannot open '" + path + "' for writing");
  const std::string bytes = serialize_weights(model);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ManifestError("failed writing '" + path + "'");
}

ToyModel load_weights(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ManifestError("cannot open '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_weights(bytes);
}

std::uint64_t weight_checksum(const ToyModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : payload_bytes(model)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

Tensor ActivationStack::as_tensor() const {
  Tensor t({num_maps(), map_height, map_width});
  t.matrix(num_maps(), positions()) = maps;
  return t;
}

RowMatrix ActivationStack::masked(std::uint64_t mask) const {
  RowMatrix out = maps;
  for (std::size_t j = 0; j < positions(); ++j) {
    if (!((mask >> j) & 1u)) out.col(static_cast<Eigen::Index>(j)).setZero();
  }
  return out;
}

ActivationStack ActivationStack::from_tensor(const Tensor& t) {
  if (t.rank() != 3) throw ShapeError("activation stack expects [N, h, w], got " + to_string(t.shape()));
  ActivationStack s;
  s.map_height = t.shape()[1];
  s.map_width = t.shape()[2];
  s.maps = t.matrix(t.shape()[0], s.map_height * s.map_width);
  return s;
}

}  // namespace crg
