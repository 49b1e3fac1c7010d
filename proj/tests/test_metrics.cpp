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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "crg/checks.hpp"
#include "crg/metrics.hpp"
#include "test_support.hpp"

namespace crg {
namespace {

using crg::testing::near;

NormalizedHeatmap map_of(std::size_t h, std::size_t w, std::initializer_list<double> values) {
  NormalizedHeatmap m;
  m.values = Eigen::Map<const RowMatrix>(values.begin(), static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(w));
  return m;
}

NormalizedHeatmap constant_map(std::size_t h, std::size_t w, double v) {
  return {RowMatrix::Constant(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(w), v)};
}

TEST(Maps, ExplanationMap) {
  const Tensor x({1, 1, 2}, {2, 4});
  EXPECT_TRUE(near(explanation_map(x, map_of(1, 2, {0.5, 1})), Tensor({1, 1, 2}, {1, 4}), 0.0));
  EXPECT_TRUE(near(explanation_map(x, constant_map(1, 2, 1.0)), x, 0.0));
  EXPECT_TRUE(near(explanation_map(x, constant_map(1, 2, 0.0)), Tensor({1, 1, 2}), 0.0));
}

TEST(Maps, AntiExplanationMap) {
  const Tensor x({1, 1, 2}, {2, 4});
  EXPECT_TRUE(near(anti_explanation_map(x, map_of(1, 2, {0.5, 1})), Tensor({1, 1, 2}, {1, 0}), 0.0));
  EXPECT_TRUE(near(anti_explanation_map(x, constant_map(1, 2, 1.0)), Tensor({1, 1, 2}), 0.0));
}

TEST(Maps, BroadcastAcrossChannelsAndSumToInput) {
  const Tensor x = crg::testing::random_tensor({3, 4, 5}, 1);
  NormalizedHeatmap h{crg::testing::random_tensor({4, 5}, 2).matrix(4, 5)};
  const Tensor e = explanation_map(x, h);
  const Tensor a = anti_explanation_map(x, h);
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(e[k] + a[k], x[k], 2 * std::numeric_limits<double>::epsilon() * x[k]);
  EXPECT_EQ(e[20 + 7], x[20 + 7] * h.values(1, 2));
}

TEST(Maps, ResolutionMismatchRejected) {
  EXPECT_THROW(explanation_map(Tensor({1, 2, 2}), constant_map(2, 3, 1)), ShapeError);
  EXPECT_THROW(anti_explanation_map(Tensor({1, 2, 2}), constant_map(3, 2, 1)), ShapeError);
}

TEST(Scores, AverageDrop) {
  const std::vector<double> y1{0.8}, o1{0.6};
  EXPECT_NEAR(average_drop(y1, o1), 0.25, 1e-15);
  const std::vector<double> y{0.5, 0.8}, o{0.7, 0.4};
  EXPECT_NEAR(average_drop(y, o), 0.25, 1e-15);
  const std::vector<double> higher{0.9, 0.9};
  EXPECT_EQ(average_drop(y, higher), 0.0);
}

TEST(Scores, AverageDropGuards) {
  const std::vector<double> zero{0.0}, one{0.5}, two{0.5, 0.5};
  EXPECT_THROW(average_drop(zero, one), std::domain_error);
  EXPECT_THROW(average_drop(one, two), std::invalid_argument);
  EXPECT_THROW(average_drop_deletion(zero, one), std::domain_error);
}

TEST(Scores, Coherency) {
  const NormalizedHeatmap h = map_of(2, 2, {0, 0.25, 1, 0.5});
  EXPECT_NEAR(coherency(h, h), 1.0, 1e-15);
  NormalizedHeatmap inv{(1.0 - h.values.array()).matrix()};
  EXPECT_NEAR(coherency(h, inv), 0.0, 1e-15);
  EXPECT_EQ(coherency(h, constant_map(2, 2, 0.3)), 0.5);
  EXPECT_EQ(coherency(constant_map(2, 2, 1), h), 0.5);
  EXPECT_THROW(coherency(h, constant_map(1, 4, 0)), ShapeError);
}

TEST(Scores, Complexity) {
  EXPECT_EQ(complexity(constant_map(3, 3, 0)), 0.0);
  EXPECT_EQ(complexity(constant_map(3, 3, 1)), 1.0);
  EXPECT_EQ(complexity(map_of(1, 4, {0, 0.5, 1, 0.5})), 0.5);
}

TEST(Scores, Adcc) {
  EXPECT_NEAR(adcc(0, 1, 0), 1.0, 1e-15);
  EXPECT_NEAR(adcc(0.5, 0.5, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(adcc(0, 1, 0.99), 3.0 / 102.0, 1e-12);
  EXPECT_EQ(adcc(1.0, 0.5, 0.5), 0.0);
  EXPECT_EQ(adcc(0.5, 0.0, 0.5), 0.0);
  EXPECT_EQ(adcc(0.5, 0.5, 1.0), 0.0);
}

TEST(Scores, AdccBoundedByHarmonicTerms) {
  for (double ad : {0.0, 0.1, 0.7})
    for (double coh : {0.05, 0.5, 1.0})
      for (double com : {0.0, 0.3, 0.95}) {
        // A harmonic mean of three terms lies in [min, 3 min].
        const double v = adcc(ad, coh, com);
        const double lo = std::min({coh, 1 - com, 1 - ad});
        EXPECT_GE(v, lo - 1e-12);
        EXPECT_LE(v, 3 * lo + 1e-12);
      }
}

TEST(Scores, IncreaseInConfidence) {
  const std::vector<double> y{0.5, 0.8}, o{0.7, 0.4};
  EXPECT_EQ(increase_confidence(y, o), 0.5);
  const std::vector<double> up{0.9, 0.9};
  EXPECT_EQ(increase_confidence(y, up), 1.0);
  EXPECT_EQ(increase_confidence(y, y), 0.0);
}

TEST(Scores, AverageDropInDeletion) {
  const std::vector<double> y{0.8}, gone{0.0}, most{0.2}, more{0.9};
  EXPECT_EQ(average_drop_deletion(y, gone), 1.0);
  EXPECT_NEAR(average_drop_deletion(y, most), 0.75, 1e-15);
  EXPECT_EQ(average_drop_deletion(y, more), 0.0);
}

class BatchTest : public ::testing::Test {
 protected:
  ToyModel model = build_model(Architecture::CnnSmooth, 3, 3, InputSpec{3, 8, 8});

  std::vector<BatchImage> batch(std::size_t n, std::uint64_t seed) const {
    std::vector<BatchImage> out;
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back({"img" + std::to_string(i), checks::synthetic_image(model.input, seed + i)});
    }
    return out;
  }
};

TEST_F(BatchTest, IdentityStandIn) {
  // Images are zero on the left half; the heatmap keeps exactly the right half.
  std::vector<BatchImage> images = batch(3, 1);
  for (auto& b : images) {
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t k = 0; k < 4; ++k) b.pixels[(c * 8 + r) * 8 + k] = 0.0;
  }
  NormalizedHeatmap keep = constant_map(8, 8, 0.0);
  keep.values.rightCols(4).setOnes();
  const MetricRecord r = evaluate_batch(model, images, [&](const Tensor&, std::size_t) { return keep; });
  EXPECT_EQ(r.ad, 0.0);
  EXPECT_EQ(r.ic, 0.0);
  EXPECT_NEAR(r.coherency, 1.0, 1e-12);
  EXPECT_EQ(r.complexity, 0.5);
  EXPECT_EQ(r.n_images(), 3u);
}

TEST_F(BatchTest, ZeroHeatmapIsFinite) {
  const MetricRecord r =
      evaluate_batch(model, batch(1, 4), [&](const Tensor&, std::size_t) { return constant_map(8, 8, 0.0); });
  EXPECT_EQ(r.complexity, 0.0);
  for (double v : {r.ad, r.coherency, r.adcc, r.ic, r.add}) EXPECT_TRUE(std::isfinite(v));
}

TEST_F(BatchTest, AllTermsAreFractions) {
  for (MethodKind m : {MethodKind::GradCam, MethodKind::ShapleyCam, MethodKind::RandomCam, MethodKind::LayerCam}) {
    const MetricRecord r = evaluate_batch(model, batch(6, 10), UtilityKind::Rest, {m, 1});
    for (double v : {r.ad, r.coherency, r.complexity, r.adcc, r.ic, r.add}) {
      EXPECT_GE(v, 0.0) << to_string(m);
      EXPECT_LE(v, 1.0) << to_string(m);
    }
    const double lo = std::min({r.coherency, 1 - r.complexity, 1 - r.ad});
    EXPECT_GE(r.adcc, lo - 1e-12);
    EXPECT_LE(r.adcc, 3 * lo + 1e-12);
  }
}

TEST_F(BatchTest, FailingImagesAreSkipped) {
  std::vector<BatchImage> images = batch(3, 1);
  images[1].pixels = Tensor({3, 5, 5});
  const MetricRecord r = evaluate_batch(model, images, UtilityKind::Rest, {MethodKind::GradCam});
  EXPECT_EQ(r.n_images(), 2u);
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_NE(r.skipped[0].find("img1"), std::string::npos);
  EXPECT_THROW(evaluate_batch(model, std::span<const BatchImage>{}, UtilityKind::Rest, {MethodKind::GradCam}),
               std::invalid_argument);
}

TEST_F(BatchTest, ParallelMatchesSerial) {
  const std::vector<BatchImage> images = batch(5, 20);
  setenv("CRG_THREADS", "1", 1);
  const MetricRecord serial = evaluate_batch(model, images, UtilityKind::Rest, {MethodKind::ShapleyCam});
  setenv("CRG_THREADS", "4", 1);
  const MetricRecord parallel = evaluate_batch(model, images, UtilityKind::Rest, {MethodKind::ShapleyCam});
  unsetenv("CRG_THREADS");
  EXPECT_EQ(serial.adcc, parallel.adcc);
  EXPECT_EQ(serial.add, parallel.add);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(serial.images[i].id, parallel.images[i].id);
}

TEST_F(BatchTest, ConfidencesArePostSoftmaxOfTarget) {
  const std::vector<BatchImage> images = batch(2, 30);
  const MetricRecord r = evaluate_batch(model, images, UtilityKind::PreSoftmax, {MethodKind::GradCam}, 2);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(r.images[i].target_class, 2u);
    EXPECT_NEAR(r.images[i].conf_full, softmax(predict(model, images[i].pixels).data())[2], 1e-15);
  }
}

}  // namespace
}  // namespace crg
