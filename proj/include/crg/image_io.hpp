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

#ifndef CRG_IMAGE_IO_HPP
#define CRG_IMAGE_IO_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "crg/tensor.hpp"

namespace crg {

/// Planar [C, H, W] image with values in [0, 1]; C is 1 or 3.
struct Image {
  Tensor pixels;

  std::size_t channels() const { return pixels.shape()[0]; }
  std::size_t height() const { return pixels.shape()[1]; }
  std::size_t width() const { return pixels.shape()[2]; }

  /// Validates the layout and clamps values into [0, 1].
  static Image from_tensor(Tensor t);

  /// Replicates a grey channel to three; three-channel images pass through.
  Image to_rgb() const;
};

class ImageFormatError : public std::runtime_error {
 public:
  ImageFormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Binary PPM (P6) or PGM (P5) with maxval 255.
Image decode_pnm(std::string_view bytes);
Image read_image(const std::string& path);

/// P6 bytes; grey images are written with the channel replicated. Samples
/// are v * 255 rounded half away from zero.
std::string encode_ppm(const Image& image);
void write_image(const std::string& path, const Image& image);

}  // namespace crg

#endif  // CRG_IMAGE_IO_HPP
