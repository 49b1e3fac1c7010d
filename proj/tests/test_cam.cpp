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

#include <cmath>

#include <gtest/gtest.h>

#include "crg/cam.hpp"
#include "crg/checks.hpp"
#include "crg/utility.hpp"
#include "test_support.hpp"

namespace crg {
namespace {

using crg::testing::near;
using crg::testing::stack_of;

WeightStack first_order(std::initializer_list<std::initializer_list<double>> rows) {
  return {stack_of(rows).maps, WeightOrder::First};
}

Heatmap assemble(MethodKind kind, const WeightStack& w, const ActivationStack& a) {
  return assemble_heatmap(w, a, {kind});
}

/// Shifts fc.bias so that classes c and k have equal logits at x.
void equalize_logits(ToyModel& model, const Tensor& x, std::size_t c, std::size_t k) {
  const Tensor y = predict(model, x);
  for (auto& [name, t] : model.weights) {
    if (name == "fc.bias" || name == "fc2.bias") t[k] += y[c] - y[k];
  }
}

TEST(Methods, NamesRoundTrip) {
  EXPECT_EQ(all_methods().size(), 11u);
  for (MethodKind m : all_methods()) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW(parse_method("scorecam"), std::invalid_argument);
}

TEST(Weights, SecondOrderCorrection) {
  const Tensor g({1, 2}, {1, 1});
  EXPECT_TRUE(near(Eigen::VectorXd(shapley_weights(g, Tensor({1, 2}, {1, 1}), stack_of({{1, 1}})).values.row(0).transpose()),
                   {0.5, 0.5}, 0.0));
  EXPECT_TRUE(near(Eigen::VectorXd(shapley_weights(Tensor({1, 2}), Tensor({1, 2}, {2, 4}), stack_of({{1, 1}})).values.row(0).transpose()),
                   {-1, -2}, 0.0));
}

TEST(Weights, AbsentHvpKeepsGradient) {
  const Tensor g({2, 2}, {1, 2, 3, 4});
  const WeightStack w = shapley_weights(g, std::nullopt, stack_of({{0, 0}, {0, 0}}));
  EXPECT_EQ(w.order, WeightOrder::First);
  EXPECT_EQ(w.values, g.matrix(2, 2));
}

TEST(Weights, ShapeMismatchRejected) {
  EXPECT_THROW(shapley_weights(Tensor({1, 3}), std::nullopt, stack_of({{1, 1}})), ShapeError);
  EXPECT_THROW(shapley_weights(Tensor({1, 2}), Tensor({2, 1}), stack_of({{1, 1}})), ShapeError);
}

TEST(Assemble, GradCam) {
  const Heatmap h = assemble(MethodKind::GradCam, first_order({{1, 1, 1}}), stack_of({{1, -1, 2}}));
  EXPECT_TRUE(near(h.pre_relu, {1, -1, 2}, 0.0));
  EXPECT_TRUE(near(h.post_relu, {1, 0, 2}, 0.0));
}

TEST(Assemble, HiResCam) {
  const Heatmap h = assemble(MethodKind::HiResCam, first_order({{1, -2, 0}}), stack_of({{3, 1, 5}}));
  EXPECT_TRUE(near(h.post_relu, {3, 0, 0}, 0.0));
}

TEST(Assemble, HiResCamVersusGradCamE) {
  // W (.) A per map is (2, -3) and (-1, 4).
  const WeightStack w = first_order({{1, 1}, {1, 1}});
  const ActivationStack a = stack_of({{2, -3}, {-1, 4}});
  EXPECT_TRUE(near(assemble(MethodKind::HiResCam, w, a).post_relu, {1, 1}, 0.0));
  EXPECT_TRUE(near(assemble(MethodKind::GradCamE, w, a).post_relu, {2, 4}, 0.0));
}

TEST(Assemble, LayerCam) {
  EXPECT_TRUE(near(assemble(MethodKind::LayerCam, first_order({{-1, 2}}), stack_of({{3, 4}})).post_relu, {0, 8}, 0.0));
}

TEST(Assemble, XGradCam) {
  EXPECT_TRUE(near(assemble(MethodKind::XGradCam, first_order({{1, 1}}), stack_of({{2, 4}})).post_relu, {2, 4}, 1e-11));  // epsilon in the denominator
}

TEST(Assemble, GradCamPlusPlus) {
  // One map, A = (1, 2), g = (1, 1): alpha = 1 / (2 + 3) per position, weight = 2 * 0.2.
  const Heatmap h = assemble(MethodKind::GradCamPP, first_order({{1, 1}}), stack_of({{1, 2}}));
  EXPECT_TRUE(near(h.pre_relu, {0.4, 0.8}, 1e-15));
  // Zero gradient gives alpha = 0, not NaN.
  EXPECT_TRUE(near(assemble(MethodKind::GradCamPP, first_order({{0, 0}}), stack_of({{1, 2}})).pre_relu, {0, 0}, 0.0));
}

TEST(Assemble, GradCamPlusPlusRejectsSecondOrder) {
  const WeightStack w{stack_of({{1, 1}}).maps, WeightOrder::Second};
  EXPECT_THROW(assemble(MethodKind::GradCamPP, w, stack_of({{1, 2}})), std::invalid_argument);
}

TEST(Assemble, OuterReluOnly) {
  const WeightStack w = first_order({{0.3, -2, 1}, {-1, 0.5, 2}});
  const ActivationStack a = stack_of({{1, 2, -3}, {0.5, -1, 2}});
  for (MethodKind m : all_methods()) {
    const Heatmap h = assemble(m, w, a);
    EXPECT_EQ(h.post_relu, h.pre_relu.cwiseMax(0.0)) << to_string(m);
  }
}

TEST(Assemble, ShapeMismatchRejected) {
  EXPECT_THROW(assemble(MethodKind::GradCam, first_order({{1, 1}}), stack_of({{1, 1, 1}})), ShapeError);
}

TEST(Assemble, RandomCamDeterministicInSeed) {
  const ToyModel m = build_model(Architecture::CnnSmooth, 3, 1);
  const Tensor x = checks::synthetic_image(m.input, 2);
  const Heatmap a = explain(m, x, {0, UtilityKind::Rest}, {MethodKind::RandomCam, 5});
  const Heatmap b = explain(m, x, {0, UtilityKind::Rest}, {MethodKind::RandomCam, 5});
  const Heatmap c = explain(m, x, {0, UtilityKind::Rest}, {MethodKind::RandomCam, 6});
  EXPECT_EQ(a.pre_relu, b.pre_relu);
  EXPECT_NE(a.pre_relu, c.pre_relu);
}

TEST(Explain, ShapleyCamCollapsesOnReluModel) {
  const ToyModel m = build_model(Architecture::CnnRelu, 3, 6);
  const Tensor x = checks::synthetic_image(m.input, 1);
  const UtilitySpec spec{2, UtilityKind::PreSoftmax};
  EXPECT_EQ(explain(m, x, spec, {MethodKind::ShapleyCam}).pre_relu, explain(m, x, spec, {MethodKind::GradCam}).pre_relu);
  EXPECT_EQ(explain(m, x, spec, {MethodKind::ShapleyCamH}).pre_relu,
            explain(m, x, spec, {MethodKind::HiResCam}).pre_relu);
  EXPECT_TRUE(near(explain(m, x, spec, {MethodKind::GradCam}).pre_relu,
                   explain(m, x, spec, {MethodKind::HiResCam}).pre_relu, 1e-12));
}

TEST(Explain, CamGapEqualsGradCamAtGapTap) {
  const ToyModel m = build_model(Architecture::CnnSmooth, 3, 6);
  const Tensor x = checks::synthetic_image(m.input, 1);
  const Heatmap cam = explain(m, x, {1, UtilityKind::Rest}, {MethodKind::CamGap});
  const Heatmap grad = explain(m, x, {1, UtilityKind::PreSoftmax}, {MethodKind::GradCam});
  EXPECT_TRUE(near(cam.pre_relu, grad.pre_relu, 1e-15));
  ToyModel mlp = build_model(Architecture::MlpSmooth, 3, 6);
  EXPECT_THROW(explain(mlp, x, {1, UtilityKind::Rest}, {MethodKind::CamGap}), std::invalid_argument);
}

TEST(Explain, BackwardPassCounts) {
  const ToyModel m = build_model(Architecture::MlpSmooth, 3, 6);
  const Tensor x = checks::synthetic_image(m.input, 1);
  EXPECT_EQ(explain_weights(m, x, {0}, {MethodKind::GradCam}).backward_passes, 1u);
  EXPECT_EQ(explain_weights(m, x, {0}, {MethodKind::ShapleyCam}).backward_passes, 2u);
  EXPECT_EQ(explain_weights(m, x, {0}, {MethodKind::RandomCam}).backward_passes, 0u);
  EXPECT_THROW(explain(m, x, {3}, {MethodKind::GradCam}), std::out_of_range);
}

TEST(Explain, SecondOrderDiffersOnSmoothModel) {
  const ToyModel m = build_model(Architecture::CnnSmooth, 3, 6);
  const Tensor x = checks::synthetic_image(m.input, 1);
  const TapForward f = forward_with_tap(m, x);
  const Tensor hv = ad::hvp(utility(f.logits, {0, UtilityKind::PostSoftmax}), f.tap, f.tap.value());
  EXPECT_GT(hv.data().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Explain, PositiveScalingScalesHeatmap) {
  ToyModel m = build_model(Architecture::CnnSmooth, 3, 2);
  const Tensor x = checks::synthetic_image(m.input, 4);
  const Heatmap base = explain(m, x, {1, UtilityKind::PreSoftmax}, {MethodKind::HiResCam});
  m.logit_scale = 3.0;
  const Heatmap scaled = explain(m, x, {1, UtilityKind::PreSoftmax}, {MethodKind::HiResCam});
  EXPECT_TRUE(near(scaled.pre_relu, 3.0 * base.pre_relu, 1e-14));
}

TEST(Classify, GapTapWeightsAreOptimal) {
  const ToyModel m = build_model(Architecture::CnnRelu, 3, 6);
  const Explanation e = explain_weights(m, checks::synthetic_image(m.input, 2), {0}, {MethodKind::GradCam});
  EXPECT_TRUE(classify_crg(e.weights.values).optimal);
  EXPECT_TRUE(classify_crg(e.weights.values, e.activations).type_i_equals_type_ii);
}

TEST(Classify, HandCases) {
  EXPECT_FALSE(classify_crg(stack_of({{1, 2}}).maps).optimal);
  EXPECT_TRUE(classify_crg(stack_of({{5, 5}, {3, 3}}).maps).optimal);
  EXPECT_TRUE(classify_crg(stack_of({{1, 2}}).maps, stack_of({{0, 0}})).type_i_equals_type_ii);
}

TEST(Theorem3, MatchesOnSmallMatrix) {
  const ToyModel m = build_model(Architecture::CnnSmooth, 2, 3);
  const HeatmapPair p = theorem3_ensemble(m, checks::synthetic_image(m.input, 8), 1, {MethodKind::GradCam});
  EXPECT_TRUE(near(p.direct.pre_relu, p.composed.pre_relu, 1e-8));
}

TEST(Theorem3, SymmetricLogitsGiveQuarterDifference) {
  ToyModel m = build_model(Architecture::CnnSmooth, 2, 3);
  const Tensor x = checks::synthetic_image(m.input, 8);
  equalize_logits(m, x, 0, 1);
  ASSERT_NEAR(softmax(predict(m, x).data())[0], 0.5, 1e-15);
  const Heatmap e0 = explain(m, x, {0, UtilityKind::PreSoftmax}, {MethodKind::HiResCam});
  const Heatmap e1 = explain(m, x, {1, UtilityKind::PreSoftmax}, {MethodKind::HiResCam});
  const HeatmapPair p = theorem3_ensemble(m, x, 0, {MethodKind::HiResCam});
  EXPECT_TRUE(near(p.direct.pre_relu, 0.25 * (e0.pre_relu - e1.pre_relu), 1e-15));
}

TEST(Theorem3, RejectsSingleClassAndNonlinearSchemes) {
  const ToyModel one = build_model(Architecture::CnnSmooth, 1, 0);
  const Tensor x = checks::synthetic_image(one.input, 0);
  EXPECT_THROW(theorem3_ensemble(one, x, 0, {MethodKind::GradCam}), std::invalid_argument);
  EXPECT_THROW(rest_decomposition(one, x, 0, {MethodKind::GradCam}), std::invalid_argument);
  const ToyModel two = build_model(Architecture::CnnSmooth, 2, 0);
  EXPECT_THROW(theorem3_ensemble(two, x, 0, {MethodKind::LayerCam}), std::invalid_argument);
  EXPECT_THROW(rest_decomposition(two, x, 0, {MethodKind::ShapleyCam}), std::invalid_argument);
}

TEST(Rest, MatchesOnCnnSmoothSeed11) {
  const ToyModel m = build_model(Architecture::CnnSmooth, 3, 11);
  const Tensor x = checks::synthetic_image(m.input, 11);
  for (std::size_t c = 0; c < 3; ++c) {
    const HeatmapPair p = rest_decomposition(m, x, c, {MethodKind::GradCam});
    EXPECT_TRUE(near(p.direct.pre_relu, p.composed.pre_relu, 1e-8)) << c;
  }
}

TEST(Rest, SymmetricLogits) {
  ToyModel m = build_model(Architecture::MlpSmooth, 2, 3);
  const Tensor x = checks::synthetic_image(m.input, 8);
  equalize_logits(m, x, 1, 0);
  const Heatmap e0 = explain(m, x, {0, UtilityKind::PreSoftmax}, {MethodKind::HiResCam});
  const Heatmap e1 = explain(m, x, {1, UtilityKind::PreSoftmax}, {MethodKind::HiResCam});
  const HeatmapPair p = rest_decomposition(m, x, 1, {MethodKind::HiResCam});
  EXPECT_TRUE(near(p.direct.pre_relu, 1.5 * e1.pre_relu - 0.5 * e0.pre_relu, 1e-14));
}

TEST(Rest, ConfidentLimitKeepsResidual) {
  ToyModel m = build_model(Architecture::MlpSmooth, 3, 1);
  const Tensor x = checks::confident_image(m, 7);
  m.logit_scale = 50.0;
  Eigen::Index top = 0;
  predict(m, x).data().maxCoeff(&top);
  const auto c = static_cast<std::size_t>(top);
  const Heatmap pre = explain(m, x, {c, UtilityKind::PreSoftmax}, {MethodKind::GradCam});
  const Heatmap rest = explain(m, x, {c, UtilityKind::Rest}, {MethodKind::GradCam});
  const Heatmap post = explain(m, x, {c, UtilityKind::PostSoftmax}, {MethodKind::GradCam});
  EXPECT_TRUE(near(rest.pre_relu, pre.pre_relu, 1e-6 * pre.pre_relu.cwiseAbs().maxCoeff()));
  EXPECT_LT(post.pre_relu.cwiseAbs().maxCoeff(), 1e-8);
}

}  // namespace
}  // namespace crg
