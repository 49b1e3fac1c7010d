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

// Deterministic toy networks with a tappable target layer.
//
//   cnn-relu    conv(3->4, 3x3, valid) -> ReLU -> GAP -> FC(4->C)
//   cnn-smooth  conv(3->4, 3x3, valid) -> SiLU -> GAP -> FC(4->C)
//   mlp-smooth  flatten -> FC(->16) -> tanh -> FC(16->C)
//
// Taps: "act" is the activation preceding GAP for the CNNs, "conv" the
// pre-activation conv output. For the MLP, "hidden" is the first FC output
// viewed as 4 maps of 2x2, "act" the tanh output with the same layout.

#ifndef CRG_MODEL_ZOO_HPP
#define CRG_MODEL_ZOO_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crg/activation.hpp"
#include "crg/autodiff.hpp"
#include "crg/tensor.hpp"

namespace crg {

enum class Architecture { CnnRelu, CnnSmooth, MlpSmooth };

std::string to_string(Architecture arch);
Architecture parse_architecture(std::string_view name);

struct InputSpec {
  std::size_t channels = 3;
  std::size_t height = 6;
  std::size_t width = 6;

  Shape shape() const { return {channels, height, width}; }
  friend bool operator==(const InputSpec&, const InputSpec&) = default;
};

struct LayerInfo {
  std::string name;
  std::string kind;
};

struct ToyModel {
  Architecture arch = Architecture::CnnRelu;
  std::size_t num_classes = 0;
  std::uint64_t seed = 0;
  InputSpec input;
  std::string tap;
  double logit_scale = 1.0;  // multiplies the logits; 1 leaves the graph unchanged
  std::vector<LayerInfo> layers;
  std::vector<std::pair<std::string, Tensor>> weights;

  const Tensor& weight(std::string_view name) const;
};

ToyModel build_model(Architecture arch, std::size_t num_classes, std::uint64_t seed, InputSpec input = {});

std::vector<std::string> available_taps(Architecture arch);
std::string default_tap(Architecture arch);

/// Selects the target layer; "auto" picks the default.
void select_tap(ToyModel& model, std::string_view tap);

/// True when the tap output feeds GAP directly (the Optimal-CRG configuration).
bool tap_precedes_gap(const ToyModel& model);

/// Shape of the tap output, [N, h, w].
Shape tap_shape(const ToyModel& model);

/// Post-tap graph: logits from a tap value of shape tap_shape(model).
ad::Var post_tap_logits(const ToyModel& model, ad::Var tap);

/// Full graph from an image var to logits, differentiable in the image.
ad::Var model_logits(const ToyModel& model, ad::Var image);

/// Plain forward pass to logits.
Tensor predict(const ToyModel& model, const Tensor& image);

struct TapForward {
  std::unique_ptr<ad::Tape> tape;
  ad::Var tap;     // independent leaf holding X_D
  ad::Var logits;  // post-tap graph output
  ActivationStack activations;
};

/// Runs the pre-tap graph, then re-enters the tap output as the independent
/// input "tap" so that derivatives start at the target layer.
TapForward forward_with_tap(const ToyModel& model, const Tensor& image);

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weight file: u32 little-endian header length, JSON header, then the
/// tensors as little-endian f64 concatenated in header order.
std::string serialize_weights(const ToyModel& model);
ToyModel deserialize_weights(std::string_view bytes);
void save_weights(const ToyModel& model, const std::string& path);
ToyModel load_weights(const std::string& path);

/// FNV-1a over the serialized payload.
std::uint64_t weight_checksum(const ToyModel& model);

}  // namespace crg

#endif  // CRG_MODEL_ZOO_HPP
