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

// Class activation mapping: weight computation, heatmap assembly for every
// supported method, CRG classification, and the pre/post-softmax and ReST
// heatmap identities.

#ifndef CRG_CAM_HPP
#define CRG_CAM_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crg/activation.hpp"
#include "crg/model_zoo.hpp"
#include "crg/tensor.hpp"
#include "crg/utility.hpp"

namespace crg {

enum class MethodKind {
  CamGap,
  GradCam,
  HiResCam,
  GradCamE,
  LayerCam,
  XGradCam,
  GradCamPP,
  RandomCam,
  ShapleyCam,
  ShapleyCamH,
  ShapleyCamE,
};

enum class WeightOrder { None, First, Second };

/// How weights and activations combine before the outer ReLU.
enum class Scheme { MeanBroadcast, Elementwise, InnerRelu, ReluGrad, XGrad, GradCamPP, Random };

struct CamMethod {
  MethodKind kind = MethodKind::GradCam;
  std::uint64_t seed = 0;  // RandomCAM only

  WeightOrder order() const;
  Scheme scheme() const;
};

std::string to_string(MethodKind kind);
MethodKind parse_method(std::string_view name);
std::vector<MethodKind> all_methods();

/// Per-map, per-position weights W (N x d) and the order they came from.
struct WeightStack {
  RowMatrix values;
  WeightOrder order = WeightOrder::First;
};

struct Heatmap {
  Eigen::VectorXd pre_relu;
  Eigen::VectorXd post_relu;
  MethodKind method = MethodKind::GradCam;
  std::size_t target_class = 0;
  std::string layer;
  std::size_t map_height = 0;
  std::size_t map_width = 0;

  RowMatrix pre_relu_map() const;
  RowMatrix post_relu_map() const;
};

inline constexpr double kXGradEpsilon = 1e-12;

/// W = grad - hvp/2, or W = grad when hvp is absent.
WeightStack shapley_weights(const Tensor& grad, const std::optional<Tensor>& hvp, const ActivationStack& stack);

/// Combines W and A per the method's scheme; post_relu = max(pre_relu, 0).
Heatmap assemble_heatmap(const WeightStack& weights, const ActivationStack& activations, const CamMethod& method);

/// Weights and activations that explain() would combine, exposed for
/// checks that need W itself.
struct Explanation {
  ActivationStack activations;
  WeightStack weights;
  Tensor logits;
  std::size_t backward_passes = 0;
};

Explanation explain_weights(const ToyModel& model, const Tensor& image, const UtilitySpec& spec,
                            const CamMethod& method);

/// One forward pass, one gradient pass, plus one HVP pass for second-order
/// methods; RandomCAM does no backward pass.
Heatmap explain(const ToyModel& model, const Tensor& image, const UtilitySpec& spec, const CamMethod& method);

struct CrgClass {
  bool type_i_equals_type_ii = false;
  bool optimal = false;
};

inline constexpr double kCrgConstantTolerance = 1e-10;

/// optimal: every row of W is constant within 1e-10 relative spread. With
/// activations, type_i_equals_type_ii compares sum_i W^i (.) A^i against
/// sum_i mean(W^i) A^i; without them it falls back to optimal.
CrgClass classify_crg(const RowMatrix& weights);
CrgClass classify_crg(const RowMatrix& weights, const ActivationStack& activations);

struct HeatmapPair {
  Heatmap direct;
  Heatmap composed;
};

/// Post-softmax heatmap against p^c sum_{k != c} p^k (E_c^pre - E_k^pre).
/// The method must be first order with the mean-broadcast or elementwise scheme.
HeatmapPair theorem3_ensemble(const ToyModel& model, const Tensor& image, std::size_t target_class,
                              const CamMethod& method);

/// ReST heatmap against E_c^pre + sum_{k != c} p^k (E_c^pre - E_k^pre).
HeatmapPair rest_decomposition(const ToyModel& model, const Tensor& image, std::size_t target_class,
                               const CamMethod& method);

}  // namespace crg

#endif  // CRG_CAM_HPP
