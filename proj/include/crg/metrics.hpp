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

// Explanation-quality metrics: Average Drop, Coherency, Complexity, ADCC,
// Increase in Confidence and Average Drop in Deletion. All values are
// fractions in [0, 1]; reports multiply by 100.

#ifndef CRG_METRICS_HPP
#define CRG_METRICS_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crg/cam.hpp"
#include "crg/heatmap_ops.hpp"
#include "crg/model_zoo.hpp"
#include "crg/tensor.hpp"
#include "crg/utility.hpp"

namespace crg {

/// x (.) h, the heatmap broadcast across channels.
Tensor explanation_map(const Tensor& x, const NormalizedHeatmap& h);

/// x (.) (1 - h), computed as x - explanation_map(x, h) so that the two maps
/// add back to x exactly.
Tensor anti_explanation_map(const Tensor& x, const NormalizedHeatmap& h);

double average_drop(std::span<const double> conf_full, std::span<const double> conf_expl);
double increase_confidence(std::span<const double> conf_full, std::span<const double> conf_expl);
double average_drop_deletion(std::span<const double> conf_full, std::span<const double> conf_anti);

/// 0.5 * pearson + 0.5; 0.5 when either map has zero variance.
double coherency(const NormalizedHeatmap& original, const NormalizedHeatmap& reexplained);

/// Mean of |h| over pixels.
double complexity(const NormalizedHeatmap& h);

/// 3 / (1/coh + 1/(1 - com) + 1/(1 - ad)); 0 when any term is degenerate.
double adcc(double ad, double coh, double com);

struct ImageMetrics {
  std::string id;
  std::size_t target_class = 0;
  double conf_full = 0.0;
  double conf_expl = 0.0;
  double conf_anti = 0.0;
  double ad = 0.0;
  double coherency = 0.0;
  double complexity = 0.0;
  bool increase = false;
  double add = 0.0;
};

struct MetricRecord {
  std::vector<ImageMetrics> images;
  std::vector<std::string> skipped;  // "id: reason"
  double ad = 0.0;
  double coherency = 0.0;
  double complexity = 0.0;
  double adcc = 0.0;
  double ic = 0.0;
  double add = 0.0;

  std::size_t n_images() const { return images.size(); }
};

/// Produces the full-resolution heatmap for an image and target class.
using HeatmapProvider = std::function<NormalizedHeatmap(const Tensor& image, std::size_t target_class)>;

HeatmapProvider cam_provider(const ToyModel& model, UtilityKind utility, const CamMethod& method);

struct BatchImage {
  std::string id;
  Tensor pixels;
};

/// Confidences are post-softmax target-class scores whatever utility made
/// the heatmap. target_class absent: each image uses its predicted class.
/// Images whose pipeline throws are recorded in skipped.
MetricRecord evaluate_batch(const ToyModel& model, std::span<const BatchImage> images,
                            const HeatmapProvider& provider, std::optional<std::size_t> target_class = {});

MetricRecord evaluate_batch(const ToyModel& model, std::span<const BatchImage> images, UtilityKind utility,
                            const CamMethod& method, std::optional<std::size_t> target_class = {});

}  // namespace crg

#endif  // CRG_METRICS_HPP
