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

#ifndef CRG_HEATMAP_OPS_HPP
#define CRG_HEATMAP_OPS_HPP

#include <array>
#include <cstddef>
#include <cstdint>

#include "crg/cam.hpp"
#include "crg/image_io.hpp"
#include "crg/tensor.hpp"

namespace crg {

/// Heatmap at image resolution with values in [0, 1].
struct NormalizedHeatmap {
  RowMatrix values;

  std::size_t height() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t width() const { return static_cast<std::size_t>(values.cols()); }
};

/// (h - min) / (max - min); all zeros when h is constant.
Eigen::VectorXd normalize_minmax(const Eigen::VectorXd& h);
RowMatrix normalize_minmax(const RowMatrix& h);

/// Corner-aligned bilinear resampling: source corners land on destination
/// corners. A 1x1 source broadcasts.
RowMatrix upsample_bilinear(const RowMatrix& h, std::size_t out_height, std::size_t out_width);

/// Upsamples the post-ReLU map to out_height x out_width, then min-max
/// normalizes, so a non-constant map always spans exactly [0, 1].
NormalizedHeatmap to_normalized(const RowMatrix& map, std::size_t out_height, std::size_t out_width);
NormalizedHeatmap to_normalized(const Heatmap& heatmap, std::size_t out_height, std::size_t out_width);

using Rgb = std::array<std::uint8_t, 3>;

/// The 256-entry jet-like lookup table shipped in data/jet256.csv.
const std::array<Rgb, 256>& colormap_lut();

/// FNV-1a over the 768 table bytes in row order.
std::uint64_t colormap_checksum();
inline constexpr std::uint64_t kColormapChecksum = 0x5056ace6e694a45eull;

/// LUT entry for t in [0, 1] (index round(255 t)).
Rgb colormap(double t);

/// Pure colormap rendering of a heatmap.
Image colorize(const NormalizedHeatmap& h);

struct OverlayStyle {
  double alpha = 0.5;
};

/// (1 - alpha) x + alpha colormap(h), clamped to [0, 1].
Image overlay(const Image& x, const NormalizedHeatmap& h, const OverlayStyle& style);

}  // namespace crg

#endif  // CRG_HEATMAP_OPS_HPP
