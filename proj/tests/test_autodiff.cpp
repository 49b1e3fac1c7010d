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
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "crg/autodiff.hpp"
#include "crg/checks.hpp"
#include "test_support.hpp"

namespace crg::ad {
namespace {

using crg::testing::near;

TEST(Forward, ReluClampsNegatives) {
  Tape t;
  const Var y = relu(t.input("x", Tensor::vector({-1.0, 2.0})));
  EXPECT_TRUE(near(y.value(), Tensor::vector({0.0, 2.0}), 0.0));
}

TEST(Forward, SoftmaxOfEqualLogitsIsUniform) {
  Tape t;
  const Var y = softmax(t.input("x", Tensor::vector({0.0, 0.0})));
  EXPECT_TRUE(near(y.value(), Tensor::vector({0.5, 0.5}), 1e-15));
}

TEST(Forward, SiluAtZero) {
  Tape t;
  EXPECT_EQ(silu(t.input("x", Tensor::vector({0.0}))).value()[0], 0.0);
}

TEST(Forward, SoftmaxIsShiftStableForLargeLogits) {
  Tape t;
  const Var y = softmax(t.input("x", Tensor::vector({1000.0, 1000.0 + std::log(3.0)})));
  EXPECT_TRUE(near(y.value(), Tensor::vector({0.25, 0.75}), 1e-12));
  EXPECT_NEAR(logsumexp(t.find("x")).value().item(), 1000.0 + std::log(4.0), 1e-9);
}

TEST(Forward, Conv2dMatchesHandComputation) {
  Tape t;
  // 1 channel 3x3 image, one 2x2 kernel of ones: each output sums a 2x2 window.
  const Var x = t.input("x", Tensor({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9}));
  const Var w = t.input("w", Tensor::filled({1, 1, 2, 2}, 1.0));
  EXPECT_TRUE(near(conv2d(x, w, 0).value(), Tensor({1, 2, 2}, {12, 16, 24, 28}), 0.0));
  const Var padded = conv2d(x, w, 1);
  EXPECT_EQ(padded.shape(), (Shape{1, 4, 4}));
  EXPECT_EQ(padded.value()[0], 1.0);
  EXPECT_EQ(padded.value()[15], 9.0);
}

TEST(Forward, GlobalAvgPoolAveragesEachChannel) {
  Tape t;
  const Var y = global_avg_pool(t.input("x", Tensor({2, 1, 2}, {1, 3, -2, 4})));
  EXPECT_TRUE(near(y.value(), Tensor::vector({2.0, 1.0}), 0.0));
}

TEST(Forward, ShapeMismatchNamesTheNode) {
  Tape t;
  const Var a = t.input("a", Tensor::vector({1, 2}));
  const Var b = t.input("b", Tensor::vector({1, 2, 3}));
  try {
    add(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("add#2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(matmul(t.input("m", Tensor({2, 3})), t.input("n", Tensor({2, 3}))), ShapeError);
}

TEST(Forward, NonFiniteInputRejected) {
  Tape t;
  EXPECT_THROW(t.input("x", Tensor::vector({std::numeric_limits<double>::quiet_NaN()})), NonFiniteError);
  EXPECT_THROW(t.input("y", Tensor::vector({INFINITY})), NonFiniteError);
}

TEST(Forward, DuplicateInputNameRejected) {
  Tape t;
  t.input("x", Tensor::vector({1.0}));
  EXPECT_THROW(t.input("x", Tensor::vector({2.0})), std::invalid_argument);
}

TEST(Forward, GraphDescriptionEvaluates) {
  const Graph g = [](Tape&, const std::map<std::string, Var>& in) {
    return std::map<std::string, Var>{{"y", mul(in.at("a"), in.at("b"))}};
  };
  const ForwardResult r = forward(g, {{"a", Tensor::vector({2, 3})}, {"b", Tensor::vector({4, 5})}});
  EXPECT_TRUE(near(r.output("y"), Tensor::vector({8, 15}), 0.0));
}

TEST(Grad, LinearFunction) {
  Tape t;
  const Var x = t.input("x", Tensor::vector({0.3, -7.0}));
  const Var f = dot(t.constant(Tensor::vector({3, 5})), x);
  EXPECT_TRUE(near(gradient(f, x), Tensor::vector({3, 5}), 0.0));
}

TEST(Grad, ProductRule) {
  Tape t;
  const Var x = t.input("x", Tensor::vector({1, 1}));
  const Var f = mul(index(x, 0), index(x, 1));
  EXPECT_TRUE(near(gradient(f, x), Tensor::vector({1, 1}), 0.0));
}

TEST(Grad, SoftmaxComponent) {
  Tape t;
  const Var y = t.input("y", Tensor::vector({0, 0}));
  EXPECT_TRUE(near(gradient(index(softmax(y), 0), y), Tensor::vector({0.25, -0.25}), 1e-15));
}

TEST(Grad, ReluDerivativeAtZeroIsZero) {
  Tape t;
  const Var x = t.input("x", Tensor::vector({0.0, 1.0, -1.0}));
  EXPECT_TRUE(near(gradient(sum(relu(x)), x), Tensor::vector({0, 1, 0}), 0.0));
}

TEST(Grad, NonScalarOutputRejected) {
  Tape t;
  const Var x = t.input("x", Tensor::vector({1, 2}));
  EXPECT_THROW(grad(tanh(x), x), ShapeError);
}

TEST(Grad, IndependentOutputGivesZeros) {
  Tape t;
  const Var x = t.input("x", Tensor::vector({1, 2}));
  const Var z = t.input("z", Tensor::vector({3}));
  EXPECT_TRUE(near(gradient(sum(z), x), Tensor::vector({0, 0}), 0.0));
}

TEST(Grad, Conv2dMatchesFiniteDifferences) {
  const Tensor x0 = crg::testing::random_tensor({2, 4, 4}, 1, -1, 1);
  const Tensor w0 = crg::testing::random_tensor({3, 2, 3, 3}, 2, -1, 1);
  auto f = [&](const Tensor& x, const Tensor& w) {
    Tape t;
    const Var y = conv2d(t.input("x", x), t.input("w", w), 1);
    return sum(mul(tanh(y), y)).value().item();
  };
  Tape t;
  const Var x = t.input("x", x0);
  const Var w = t.input("w", w0);
  const Var y = conv2d(x, w, 1);
  const Var out = sum(mul(tanh(y), y));
  const Tensor gx = gradient(out, x);
  const Tensor gw = gradient(out, w);
  const Tensor fx = finite_diff_gradient([&](const Tensor& p) { return f(p, w0); }, x0, 1e-6);
  const Tensor fw = finite_diff_gradient([&](const Tensor& p) { return f(x0, p); }, w0, 1e-6);
  EXPECT_TRUE(near(gx, fx, 1e-7));
  EXPECT_TRUE(near(gw, fw, 1e-7));
}

// Each smooth primitive against central differences at a generic point.
class PrimitiveGrad : public ::testing::TestWithParam<int> {};

TEST_P(PrimitiveGrad, MatchesFiniteDifferences) {
  auto build = [](Var x) -> Var {
    Tape& t = x.tape();
    switch (GetParam()) {
      case 0: return sum(sigmoid(x));
      case 1: return sum(silu(x));
      case 2: return sum(tanh(x));
      case 3: return sum(softplus(x));
      case 4: return sum(exp(x));
      case 5: return sum(log(offset(mul(x, x), 1.0)));
      case 6: return index(softmax(x), 1);
      case 7: return logsumexp(x);
      case 8: return sum(reciprocal(offset(mul(x, x), 0.5)));
      case 9: return index(log_softmax(x), 0);
      case 10: {
        const Var m = t.constant(Tensor({2, 4}, {1, -2, 0.5, 3, 0, 1, -1, 2}));
        return sum(tanh(matmul(m, reshape(x, {4, 1}))));
      }
      case 11: return dot(transpose(reshape(x, {2, 2})), reshape(mul(x, x), {2, 2}));
      default: return sub(sum(scale(x, 3.0)), sum(global_avg_pool(reshape(mul(x, x), {1, 2, 2}))));
    }
  };
  const Tensor x0 = Tensor::vector({0.3, -0.7, 1.1, -0.2});
  Tape t;
  const Var x = t.input("x", x0);
  const Tensor g = gradient(build(x), x);
  const Tensor fd = finite_diff_gradient(
      [&](const Tensor& p) {
        Tape u;
        return build(u.input("x", p)).value().item();
      },
      x0, 1e-5 * (1.0 + x0.data().cwiseAbs().maxCoeff()));
  EXPECT_LE((g.data() - fd.data()).norm() / (fd.data().norm() + 1e-12), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Primitives, PrimitiveGrad, ::testing::Range(0, 13));

TEST(Hvp, SumOfSquares) {
  Tape t;
  const Var x = t.input("x", Tensor::vector({0.4, -1.3}));
  EXPECT_TRUE(near(hvp(sum(mul(x, x)), x, Tensor::vector({1, 2})), Tensor::vector({2, 4}), 1e-15));
}

TEST(Hvp, Bilinear) {
  Tape t;
  const Var x = t.input("x", Tensor::vector({0.7, 2.0}));
  const Var f = mul(index(x, 0), index(x, 1));
  EXPECT_TRUE(near(hvp(f, x, Tensor::vector({1, 0})), Tensor::vector({0, 1}), 0.0));
}

TEST(Hvp, LinearIsZero) {
  Tape t;
  const Var x = t.input("x", Tensor::vector({0.7, 2.0, -1.0}));
  const Var f = dot(t.constant(Tensor::vector({1, -4, 2})), x);
  EXPECT_TRUE(near(hvp(f, x, Tensor::vector({5, 6, 7})), Tensor::vector({0, 0, 0}), 0.0));
}

TEST(Hvp, DirectionMayAliasTapeValue) {
  Tape t;
  const Var x = t.input("x", Tensor::vector({0.5, -1.5, 2.0}));
  const Var f = sum(mul(mul(x, x), x));
  // 3x^2 on the diagonal, applied to x itself.
  EXPECT_TRUE(near(hvp(f, x, x.value()), Tensor::vector({1.5, 13.5, 24.0}), 1e-14));
}

TEST(Hvp, ShapeMismatchRejected) {
  Tape t;
  const Var x = t.input("x", Tensor::vector({1, 2}));
  EXPECT_THROW(hvp(sum(mul(x, x)), x, Tensor::vector({1, 2, 3})), ShapeError);
}

TEST(Hvp, SymmetricOnSmoothGraphs) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const checks::SmoothGraph g{s, 4};
    std::mt19937_64 rng(s);
    const Tensor x0 = crg::testing::random_tensor({4}, s, -1, 1);
    const Tensor u = crg::testing::random_tensor({4}, s + 100, -1, 1);
    const Tensor v = crg::testing::random_tensor({4}, s + 200, -1, 1);
    Tape t;
    const Var x = t.input("x", x0);
    const Var f = g.build(x);
    const double a = u.data().dot(hvp(f, x, v).data());
    const double b = v.data().dot(hvp(f, x, u).data());
    EXPECT_NEAR(a, b, 1e-9 * (1.0 + std::abs(a))) << "graph " << s;
  }
}

TEST(Hvp, PiecewiseLinearGraphHasZeroHessian) {
  const auto r = checks::piecewise_linear_zero_hvp(20, 3);
  EXPECT_TRUE(r.passed) << r.detail.dump();
}

TEST(FiniteDiff, Quadratic) {
  const Tensor g = finite_diff_gradient([](const Tensor& x) { return x[0] * x[0]; }, Tensor::vector({2.0}), 1e-5);
  EXPECT_NEAR(g[0], 4.0, 1e-8);
}

TEST(FiniteDiff, Linear) {
  const Tensor g = finite_diff_gradient([](const Tensor& x) { return 3 * x[0] + 5 * x[1]; },
                                        Tensor::vector({-2.0, 9.0}), 1e-5);
  EXPECT_TRUE(near(g, Tensor::vector({3, 5}), 1e-9));
}

TEST(FiniteDiff, Exponential) {
  const Tensor g = finite_diff_gradient([](const Tensor& x) { return std::exp(x[0]); }, Tensor::vector({0.0}), 1e-5);
  EXPECT_NEAR(g[0], 1.0, 1e-9);
}

TEST(FiniteDiff, NonPositiveStepRejected) {
  auto f = [](const Tensor& x) { return x[0]; };
  EXPECT_THROW(finite_diff_gradient(f, Tensor::vector({1.0}), 0.0), std::invalid_argument);
  EXPECT_THROW(finite_diff_gradient(f, Tensor::vector({1.0}), -1e-3), std::invalid_argument);
}

TEST(Replay, ReproducesEveryNodeBitForBit) {
  const auto r = checks::tape_replay_determinism(10, 5);
  EXPECT_TRUE(r.passed) << r.detail.dump();
}

TEST(Suites, GradientAndHvpAgainstFiniteDifferences) {
  const auto g = checks::gradient_vs_finite_differences(30, 11);
  const auto h = checks::hvp_vs_finite_differences(30, 11);
  EXPECT_TRUE(g.passed) << g.detail.dump();
  EXPECT_TRUE(h.passed) << h.detail.dump();
}

}  // namespace
}  // namespace crg::ad
