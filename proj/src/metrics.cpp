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

#include "crg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crg/parallel.hpp"

namespace crg {

namespace {

void require_matching(const Tensor& x, const NormalizedHeatmap& h) {
  if (x.rank() != 3 || x.shape()[1] != h.height() || x.shape()[2] != h.width()) {
    throw ShapeError("heatmap " + std::to_string(h.height()) + "x" + std::to_string(h.width()) +
                     " does not match image " + to_string(x.shape()));
  }
}

void require_equal_length(std::span<const double> a, std::span<const double> b, const char* who) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(who) + ": score lists differ in length");
}

double drop(std::span<const double> full, std::span<const double> other, const char* who) {
  require_equal_length(full, other, who);
  if (full.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (!(full[i] > 0.0)) {
      throw std::domain_error(std::string(who) + ": full-image confidence must be positive (image " +
                              std::to_string(i) + ")");
    }
    acc += std::max(0.0, full[i] - other[i]) / full[i];
  }
  return acc / static_cast<double>(full.size());
}

double softmax_score(const ToyModel& model, const Tensor& x, std::size_t c) {
  return softmax(predict(model, x).data())[static_cast<Eigen::Index>(c)];
}

}  // namespace

Tensor explanation_map(const Tensor& x, const NormalizedHeatmap& h) {
  require_matching(x, h);
  Tensor out = x;
  const std::size_t plane = h.height() * h.width();
  const Eigen::Map<const Eigen::VectorXd> mask(h.values.data(), static_cast<Eigen::Index>(plane));
  for (std::size_t c = 0; c < x.shape()[0]; ++c) {
    auto seg = out.data().segment(static_cast<Eigen::Index>(c * plane), static_cast<Eigen::Index>(plane));
    seg = seg.cwiseProduct(mask);
  }
  return out;
}

Tensor anti_explanation_map(const Tensor& x, const NormalizedHeatmap& h) {
  return Tensor(x.shape(), x.data() - explanation_map(x, h).data());
}

double average_drop(std::span<const double> conf_full, std::span<const double> conf_expl) {
  return drop(conf_full, conf_expl, "average_drop");
}

double average_drop_deletion(std::span<const double> conf_full, std::span<const double> conf_anti) {
  return drop(conf_full, conf_anti, "average_drop_deletion");
}

double increase_confidence(std::span<const double> conf_full, std::span<const double> conf_expl) {
  require_equal_length(conf_full, conf_expl, "increase_confidence");
  if (conf_full.empty()) return 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < conf_full.size(); ++i) {
    if (conf_full[i] < conf_expl[i]) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(conf_full.size());
}

double coherency(const NormalizedHeatmap& original, const NormalizedHeatmap& reexplained) {
  if (original.values.rows() != reexplained.values.rows() || original.values.cols() != reexplained.values.cols()) {
    throw ShapeError("coherency: heatmaps differ in resolution");
  }
  const auto a = original.values.array() - original.values.mean();
  const auto b = reexplained.values.array() - reexplained.values.mean();
  const double va = a.square().sum();
  const double vb = b.square().sum();
  double corr = 0.0;
  if (va > 0.0 && vb > 0.0) corr = std::clamp((a * b).sum() / std::sqrt(va * vb), -1.0, 1.0);
  return 0.5 * corr + 0.5;
}

double complexity(const NormalizedHeatmap& h) {
  if (h.values.size() == 0) return 0.0;
  return h.values.cwiseAbs().mean();
}

double adcc(double ad, double coh, double com) {
  if (!(coh > 0.0) || !(com < 1.0) || !(ad < 1.0)) return 0.0;
  return 3.0 / (1.0 / coh + 1.0 / (1.0 - com) + 1.0 / (1.0 - ad));
}

HeatmapProvider cam_provider(const ToyModel& model, UtilityKind utility, const CamMethod& method) {
  return [model, utility, method](const Tensor& image, std::size_t target) {
    const Heatmap h = explain(model, image, {target, utility}, method);
    return to_normalized(h, image.shape()[1], image.shape()[2]);
  };
}

MetricRecord evaluate_batch(const ToyModel& model, std::span<const BatchImage> images,
                            const HeatmapProvider& provider, std::optional<std::size_t> target_class) {
  if (images.empty()) throw std::invalid_argument("evaluate_batch: no images");
  struct Slot {
    std::optional<ImageMetrics> metrics;
    std::string error;
  };
  std::vector<Slot> slots(images.size());
  parallel_for(
      images.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const BatchImage& item = images[i];
          try {
            const Tensor& x = item.pixels;
            ImageMetrics m;
            m.id = item.id;
            const Tensor logits = predict(model, x);
            m.target_class = target_class.value_or(static_cast<std::size_t>(
                std::max_element(logits.data().begin(), logits.data().end()) - logits.data().begin()));
            const NormalizedHeatmap h = provider(x, m.target_class);
            const Tensor expl = explanation_map(x, h);
            const Tensor anti = anti_explanation_map(x, h);
            m.conf_full = softmax(logits.data())[static_cast<Eigen::Index>(m.target_class)];
            m.conf_expl = softmax_score(model, expl, m.target_class);
            m.conf_anti = softmax_score(model, anti, m.target_class);
            const NormalizedHeatmap again = provider(expl, m.target_class);
            m.ad = average_drop(std::span(&m.conf_full, 1), std::span(&m.conf_expl, 1));
            m.add = average_drop_deletion(std::span(&m.conf_full, 1), std::span(&m.conf_anti, 1));
            m.increase = m.conf_full < m.conf_expl;
            m.coherency = coherency(h, again);
            m.complexity = complexity(h);
            slots[i].metrics = m;
          } catch (const std::exception& e) {
            slots[i].error = e.what();
          }
        }
      },
      1);

  MetricRecord record;
  std::vector<double> full, expl, anti;
  double coh_sum = 0.0, com_sum = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].metrics) {
      record.skipped.push_back(images[i].id + ": " + slots[i].error);
      continue;
    }
    const ImageMetrics& m = *slots[i].metrics;
    full.push_back(m.conf_full);
    expl.push_back(m.conf_expl);
    anti.push_back(m.conf_anti);
    coh_sum += m.coherency;
    com_sum += m.complexity;
    record.images.push_back(m);
  }
  if (record.images.empty()) return record;
  const auto n = static_cast<double>(record.images.size());
  record.ad = average_drop(full, expl);
  record.ic = increase_confidence(full, expl);
  record.add = average_drop_deletion(full, anti);
  record.coherency = coh_sum / n;
  record.complexity = com_sum / n;
  record.adcc = adcc(record.ad, record.coherency, record.complexity);
  return record;
}

MetricRecord evaluate_batch(const ToyModel& model, std::span<const BatchImage> images, UtilityKind utility,
                            const CamMethod& method, std::optional<std::size_t> target_class) {
  return evaluate_batch(model, images, cam_provider(model, utility, method), target_class);
}

}  // namespace crg
