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

#include "crg/heatmap_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crg {

Eigen::VectorXd normalize_minmax(const Eigen::VectorXd& h) {
  if (h.size() == 0) return h;
  const double lo = h.minCoeff();
  const double hi = h.maxCoeff();
  if (!(hi > lo)) return Eigen::VectorXd::Zero(h.size());
  return ((h.array() - lo) / (hi - lo)).matrix();
}

RowMatrix normalize_minmax(const RowMatrix& h) {
  if (h.size() == 0) return h;
  const double lo = h.minCoeff();
  const double hi = h.maxCoeff();
  if (!(hi > lo)) return RowMatrix::Zero(h.rows(), h.cols());
  return ((h.array() - lo) / (hi - lo)).matrix();
}

RowMatrix upsample_bilinear(const RowMatrix& h, std::size_t out_height, std::size_t out_width) {
  if (h.rows() < 1 || h.cols() < 1) throw ShapeError("upsample_bilinear: empty source map");
  if (out_height == 0 || out_width == 0) throw ShapeError("upsample_bilinear: zero target dimension");
  const auto src_h = static_cast<std::size_t>(h.rows());
  const auto src_w = static_cast<std::size_t>(h.cols());
  auto coordinate = [](std::size_t i, std::size_t out, std::size_t src) {
    if (out == 1 || src == 1) return 0.0;
    return static_cast<double>(i) * static_cast<double>(src - 1) / static_cast<double>(out - 1);
  };
  RowMatrix out(static_cast<Eigen::Index>(out_height), static_cast<Eigen::Index>(out_width));
  for (std::size_t y = 0; y < out_height; ++y) {
    const double sy = coordinate(y, out_height, src_h);
    const auto y0 = std::min(static_cast<std::size_t>(sy), src_h - 1);
    const std::size_t y1 = std::min(y0 + 1, src_h - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < out_width; ++x) {
      const double sx = coordinate(x, out_width, src_w);
      const auto x0 = std::min(static_cast<std::size_t>(sx), src_w - 1);
      const std::size_t x1 = std::min(x0 + 1, src_w - 1);
      const double fx = sx - static_cast<double>(x0);
      const auto at = [&](std::size_t r, std::size_t c) {
        return h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      };
      const double top = fx == 0.0 ? at(y0, x0) : (1.0 - fx) * at(y0, x0) + fx * at(y0, x1);
      const double bottom = fx == 0.0 ? at(y1, x0) : (1.0 - fx) * at(y1, x0) + fx * at(y1, x1);
      out(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) =
          fy == 0.0 ? top : (1.0 - fy) * top + fy * bottom;
    }
  }
  return out;
}

NormalizedHeatmap to_normalized(const RowMatrix& map, std::size_t out_height, std::size_t out_width) {
  return NormalizedHeatmap{normalize_minmax(upsample_bilinear(map, out_height, out_width))};
}

NormalizedHeatmap to_normalized(const Heatmap& heatmap, std::size_t out_height, std::size_t out_width) {
  return to_normalized(heatmap.post_relu_map(), out_height, out_width);
}

const std::array<Rgb, 256>& colormap_lut() {
  static const std::array<Rgb, 256> lut =
#include "colormap_lut.inc"
      ;
  return lut;
}

std::uint64_t colormap_checksum() {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const Rgb& entry : colormap_lut()) {
    for (std::uint8_t v : entry) {
      h ^= v;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

Rgb colormap(double t) {
  const double clamped = std::clamp(t, 0.0, 1.0);
  return colormap_lut()[static_cast<std::size_t>(std::lround(clamped * 255.0))];
}

Image colorize(const NormalizedHeatmap& h) {
  const std::size_t rows = h.height(), cols = h.width(), plane = rows * cols;
  Tensor out({3, rows, cols});
  for (std::size_t y = 0; y < rows; ++y) {
    for (std::size_t x = 0; x < cols; ++x) {
      const Rgb rgb = colormap(h.values(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)));
      for (std::size_t c = 0; c < 3; ++c) out[c * plane + y * cols + x] = rgb[c] / 255.0;
    }
  }
  return Image{std::move(out)};
}

Image overlay(const Image& x, const NormalizedHeatmap& h, const OverlayStyle& style) {
  if (!(style.alpha >= 0.0 && style.alpha <= 1.0)) throw std::invalid_argument("overlay: alpha must lie in [0, 1]");
  if (x.height() != h.height() || x.width() != h.width()) {
    throw ShapeError("overlay: image is " + std::to_string(x.height()) + "x" + std::to_string(x.width()) +
                     ", heatmap is " + std::to_string(h.height()) + "x" + std::to_string(h.width()));
  }
  const Image base = x.to_rgb();
  const Image colors = colorize(h);
  Tensor out({3, x.height(), x.width()});
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::clamp((1.0 - style.alpha) * base.pixels[k] + style.alpha * colors.pixels[k], 0.0, 1.0);
  }
  return Image{std::move(out)};
}

}  // namespace crg
