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

#include "crg/cam.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "crg/autodiff.hpp"

namespace crg {

namespace {

struct MethodName {
  MethodKind kind;
  const char* name;
};

constexpr MethodName kMethodNames[] = {
    {MethodKind::CamGap, "cam-gap"},         {MethodKind::GradCam, "gradcam"},
    {MethodKind::HiResCam, "hirescam"},      {MethodKind::GradCamE, "gradcam-e"},
    {MethodKind::LayerCam, "layercam"},      {MethodKind::XGradCam, "xgradcam"},
    {MethodKind::GradCamPP, "gradcampp"},    {MethodKind::RandomCam, "randomcam"},
    {MethodKind::ShapleyCam, "shapleycam"},  {MethodKind::ShapleyCamH, "shapleycam-h"},
    {MethodKind::ShapleyCamE, "shapleycam-e"},
};

Heatmap make_heatmap(Eigen::VectorXd pre, const CamMethod& method, std::size_t target, const std::string& layer,
                     const ActivationStack& a) {
  Heatmap h;
  h.post_relu = pre.cwiseMax(0.0);
  h.pre_relu = std::move(pre);
  h.method = method.kind;
  h.target_class = target;
  h.layer = layer;
  h.map_height = a.map_height;
  h.map_width = a.map_width;
  return h;
}

Eigen::VectorXd gradcampp_pre(const RowMatrix& g, const RowMatrix& a) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double map_sum = a.row(i).sum();
    double weight = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double gj = g(i, j);
      const double g2 = gj * gj;
      const double denom = 2.0 * g2 + map_sum * g2 * gj;
      const double alpha = denom != 0.0 ? g2 / denom : 0.0;
      weight += std::max(gj, 0.0) * alpha;
    }
    out += weight * a.row(i).transpose();
  }
  return out;
}

Eigen::VectorXd random_coefficients(std::size_t maps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd r(static_cast<Eigen::Index>(maps));
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    r[i] = 2.0 * u - 1.0;
  }
  return r;
}

void require_linear_scheme(const CamMethod& method, const char* who) {
  const Scheme s = method.scheme();
  if (method.order() != WeightOrder::First || (s != Scheme::MeanBroadcast && s != Scheme::Elementwise) ||
      method.kind == MethodKind::CamGap) {
    throw std::invalid_argument(std::string(who) + ": method " + to_string(method.kind) +
                                " is not a first-order mean-broadcast or elementwise method");
  }
}

/// Pre-softmax heatmaps for every class and the softmax of the logits.
struct ClassHeatmaps {
  std::vector<Eigen::VectorXd> pre;
  Eigen::VectorXd probs;
};

ClassHeatmaps per_class_pre(const ToyModel& model, const Tensor& image, const CamMethod& method) {
  ClassHeatmaps out;
  for (std::size_t k = 0; k < model.num_classes; ++k) {
    out.pre.push_back(explain(model, image, {k, UtilityKind::PreSoftmax}, method).pre_relu);
  }
  out.probs = softmax(predict(model, image).data());
  return out;
}

}  // namespace

WeightOrder CamMethod::order() const {
  switch (kind) {
    case MethodKind::RandomCam:
      return WeightOrder::None;
    case MethodKind::ShapleyCam:
    case MethodKind::ShapleyCamH:
    case MethodKind::ShapleyCamE:
      return WeightOrder::Second;
    default:
      return WeightOrder::First;
  }
}

Scheme CamMethod::scheme() const {
  switch (kind) {
    case MethodKind::CamGap:
    case MethodKind::GradCam:
    case MethodKind::ShapleyCam:
      return Scheme::MeanBroadcast;
    case MethodKind::HiResCam:
    case MethodKind::ShapleyCamH:
      return Scheme::Elementwise;
    case MethodKind::GradCamE:
    case MethodKind::ShapleyCamE:
      return Scheme::InnerRelu;
    case MethodKind::LayerCam:
      return Scheme::ReluGrad;
    case MethodKind::XGradCam:
      return Scheme::XGrad;
    case MethodKind::GradCamPP:
      return Scheme::GradCamPP;
    case MethodKind::RandomCam:
      return Scheme::Random;
  }
  throw std::logic_error("unhandled method");
}

std::string to_string(MethodKind kind) {
  for (const auto& m : kMethodNames) {
    if (m.kind == kind) return m.name;
  }
  return "unknown";
}

MethodKind parse_method(std::string_view name) {
  for (const auto& m : kMethodNames) {
    if (name == m.name) return m.kind;
  }
  throw std::invalid_argument("unknown CAM method '" + std::string(name) + "'");
}

std::vector<MethodKind> all_methods() {
  std::vector<MethodKind> out;
  for (const auto& m : kMethodNames) out.push_back(m.kind);
  return out;
}

RowMatrix Heatmap::pre_relu_map() const {
  return Eigen::Map<const RowMatrix>(pre_relu.data(), static_cast<Eigen::Index>(map_height),
                                     static_cast<Eigen::Index>(map_width));
}

RowMatrix Heatmap::post_relu_map() const {
  return Eigen::Map<const RowMatrix>(post_relu.data(), static_cast<Eigen::Index>(map_height),
                                     static_cast<Eigen::Index>(map_width));
}

WeightStack shapley_weights(const Tensor& grad, const std::optional<Tensor>& hvp, const ActivationStack& stack) {
  const std::size_t n = stack.num_maps(), d = stack.positions();
  if (grad.size() != n * d) {
    throw ShapeError("shapley_weights: gradient " + to_string(grad.shape()) + " does not match a stack of " +
                     std::to_string(n) + " maps x " + std::to_string(d) + " positions");
  }
  WeightStack w;
  w.values = grad.matrix(n, d);
  w.order = WeightOrder::First;
  if (hvp) {
    if (hvp->shape() != grad.shape()) {
      throw ShapeError("shapley_weights: hvp " + to_string(hvp->shape()) + " differs from gradient " +
                       to_string(grad.shape()));
    }
    w.values -= 0.5 * hvp->matrix(n, d);
    w.order = WeightOrder::Second;
  }
  return w;
}

Heatmap assemble_heatmap(const WeightStack& weights, const ActivationStack& activations, const CamMethod& method) {
  const RowMatrix& w = weights.values;
  const RowMatrix& a = activations.maps;
  if (method.scheme() != Scheme::Random && (w.rows() != a.rows() || w.cols() != a.cols())) {
    throw ShapeError("assemble_heatmap: weights " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                     " vs activations " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  Eigen::VectorXd pre;
  switch (method.scheme()) {
    case Scheme::MeanBroadcast:
      pre = a.transpose() * w.rowwise().mean();
      break;
    case Scheme::Elementwise:
      pre = w.cwiseProduct(a).colwise().sum().transpose();
      break;
    case Scheme::InnerRelu:
      pre = w.cwiseProduct(a).cwiseMax(0.0).colwise().sum().transpose();
      break;
    case Scheme::ReluGrad:
      pre = w.cwiseMax(0.0).cwiseProduct(a).colwise().sum().transpose();
      break;
    case Scheme::XGrad: {
      const Eigen::VectorXd coeff = w.cwiseProduct(a).rowwise().mean().array() /
                                    (a.rowwise().mean().array() + kXGradEpsilon);
      pre = a.transpose() * coeff;
      break;
    }
    case Scheme::GradCamPP:
      if (weights.order != WeightOrder::First) {
        throw std::invalid_argument("assemble_heatmap: gradcampp requires raw first-order gradients");
      }
      pre = gradcampp_pre(w, a);
      break;
    case Scheme::Random:
      pre = a.transpose() * random_coefficients(activations.num_maps(), method.seed);
      break;
  }
  return make_heatmap(std::move(pre), method, 0, "", activations);
}

Explanation explain_weights(const ToyModel& model, const Tensor& image, const UtilitySpec& spec,
                            const CamMethod& method) {
  UtilitySpec effective = spec;
  if (method.kind == MethodKind::CamGap) {
    if (!tap_precedes_gap(model)) {
      throw std::invalid_argument("cam-gap requires the tap preceding global average pooling");
    }
    effective.kind = UtilityKind::PreSoftmax;
  }
  if (effective.target_class >= model.num_classes) {
    throw std::out_of_range("target class " + std::to_string(effective.target_class) + " out of range for " +
                            std::to_string(model.num_classes) + " classes");
  }
  TapForward fwd = forward_with_tap(model, image);
  Explanation out;
  out.logits = fwd.logits.value();
  out.activations = fwd.activations;
  if (method.order() == WeightOrder::None) {
    out.weights.order = WeightOrder::None;
    out.weights.values = RowMatrix::Zero(fwd.activations.maps.rows(), fwd.activations.maps.cols());
    return out;
  }
  const ad::Var u = utility(fwd.logits, effective);
  const Tensor g = ad::gradient(u, fwd.tap);
  out.backward_passes = 1;
  std::optional<Tensor> hv;
  if (method.order() == WeightOrder::Second) {
    hv = ad::hvp(u, fwd.tap, fwd.tap.value());
    out.backward_passes = 2;
  }
  out.weights = shapley_weights(g, hv, fwd.activations);
  return out;
}

Heatmap explain(const ToyModel& model, const Tensor& image, const UtilitySpec& spec, const CamMethod& method) {
  const Explanation e = explain_weights(model, image, spec, method);
  Heatmap h = assemble_heatmap(e.weights, e.activations, method);
  h.target_class = spec.target_class;
  h.layer = model.tap;
  return h;
}

CrgClass classify_crg(const RowMatrix& weights) {
  CrgClass c;
  c.optimal = true;
  for (Eigen::Index i = 0; i < weights.rows() && c.optimal; ++i) {
    if (weights.cols() == 0) break;
    const double spread = weights.row(i).maxCoeff() - weights.row(i).minCoeff();
    const double magnitude = weights.row(i).cwiseAbs().maxCoeff();
    if (spread > kCrgConstantTolerance * magnitude) c.optimal = false;
  }
  c.type_i_equals_type_ii = c.optimal;
  return c;
}

CrgClass classify_crg(const RowMatrix& weights, const ActivationStack& activations) {
  CrgClass c = classify_crg(weights);
  const WeightStack w{weights, WeightOrder::First};
  const Eigen::VectorXd type_i = assemble_heatmap(w, activations, {MethodKind::HiResCam}).pre_relu;
  const Eigen::VectorXd type_ii = assemble_heatmap(w, activations, {MethodKind::GradCam}).pre_relu;
  const double scale = std::max(type_i.cwiseAbs().maxCoeff(), type_ii.cwiseAbs().maxCoeff());
  c.type_i_equals_type_ii = (type_i - type_ii).cwiseAbs().maxCoeff() <= kCrgConstantTolerance * (1.0 + scale);
  return c;
}

HeatmapPair theorem3_ensemble(const ToyModel& model, const Tensor& image, std::size_t target_class,
                              const CamMethod& method) {
  require_linear_scheme(method, "theorem3_ensemble");
  if (model.num_classes < 2) throw std::invalid_argument("theorem3_ensemble: needs at least two classes");
  HeatmapPair out;
  out.direct = explain(model, image, {target_class, UtilityKind::PostSoftmax}, method);
  const ClassHeatmaps cls = per_class_pre(model, image, method);
  const double pc = cls.probs[static_cast<Eigen::Index>(target_class)];
  Eigen::VectorXd ensemble = Eigen::VectorXd::Zero(cls.pre[target_class].size());
  for (std::size_t k = 0; k < model.num_classes; ++k) {
    if (k == target_class) continue;
    ensemble += cls.probs[static_cast<Eigen::Index>(k)] * (cls.pre[target_class] - cls.pre[k]);
  }
  out.composed = out.direct;
  out.composed.pre_relu = pc * ensemble;
  out.composed.post_relu = out.composed.pre_relu.cwiseMax(0.0);
  return out;
}

HeatmapPair rest_decomposition(const ToyModel& model, const Tensor& image, std::size_t target_class,
                               const CamMethod& method) {
  require_linear_scheme(method, "rest_decomposition");
  if (model.num_classes < 2) throw std::invalid_argument("rest_decomposition: needs at least two classes");
  HeatmapPair out;
  out.direct = explain(model, image, {target_class, UtilityKind::Rest}, method);
  const ClassHeatmaps cls = per_class_pre(model, image, method);
  Eigen::VectorXd composed = cls.pre[target_class];
  for (std::size_t k = 0; k < model.num_classes; ++k) {
    if (k == target_class) continue;
    composed += cls.probs[static_cast<Eigen::Index>(k)] * (cls.pre[target_class] - cls.pre[k]);
  }
  out.composed = out.direct;
  out.composed.pre_relu = std::move(composed);
  out.composed.post_relu = out.composed.pre_relu.cwiseMax(0.0);
  return out;
}

}  // namespace crg
