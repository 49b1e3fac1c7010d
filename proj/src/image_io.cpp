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

#include "crg/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

namespace crg {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::size_t number(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (value > 1'000'000) throw ImageFormatError(std::string(field) + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ImageFormatError(std::string("expected ") + field, start);
    return value;
  }

  void single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw ImageFormatError("expected whitespace after maxval", pos_);
    }
    ++pos_;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

Image Image::from_tensor(Tensor t) {
  if (t.rank() != 3 || (t.shape()[0] != 1 && t.shape()[0] != 3)) {
    throw ShapeError("image tensor must be [1|3, H, W], got " + to_string(t.shape()));
  }
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = std::clamp(t[k], 0.0, 1.0);
  return Image{std::move(t)};
}

Image Image::to_rgb() const {
  if (channels() == 3) return *this;
  const std::size_t plane = height() * width();
  Tensor out({3, height(), width()});
  for (std::size_t c = 0; c < 3; ++c) {
    out.data().segment(static_cast<Eigen::Index>(c * plane), static_cast<Eigen::Index>(plane)) = pixels.data();
  }
  return Image{std::move(out)};
}

Image decode_pnm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5')) {
    throw ImageFormatError("expected magic P6 or P5", 0);
  }
  const std::size_t channels = bytes[1] == '6' ? 3 : 1;
  HeaderReader header(bytes);
  const std::size_t width = header.number("width");
  const std::size_t height = header.number("height");
  const std::size_t maxval_at = (header.skip_space_and_comments(), header.offset());
  const std::size_t maxval = header.number("maxval");
  if (maxval != 255) throw ImageFormatError("unsupported maxval " + std::to_string(maxval) + " (only 255)", maxval_at);
  if (width == 0 || height == 0) throw ImageFormatError("zero image dimension", maxval_at);
  header.single_whitespace();
  const std::size_t start = header.offset();
  const std::size_t need = channels * width * height;
  if (bytes.size() - start < need) {
    throw ImageFormatError("truncated payload: need " + std::to_string(need) + " bytes, have " +
                               std::to_string(bytes.size() - start),
                           bytes.size());
  }
  Tensor t({channels, height, width});
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        const auto raw = static_cast<unsigned char>(bytes[start + (y * width + x) * channels + c]);
        t[(c * height + y) * width + x] = static_cast<double>(raw) / 255.0;
      }
    }
  }
  return Image::from_tensor(std::move(t));
}

Image read_image(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open image '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return decode_pnm(bytes);
  } catch (const ImageFormatError& e) {
    throw ImageFormatError(path + ": " + e.what(), e.offset());
  }
}

std::string encode_ppm(const Image& image) {
  const Image rgb = image.to_rgb();
  const std::size_t h = rgb.height(), w = rgb.width();
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + 3 * h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = std::clamp(rgb.pixels[(c * h + y) * w + x], 0.0, 1.0);
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
      }
    }
  }
  return out;
}

void write_image(const std::string& path, const Image& image) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  const std::string bytes = encode_ppm(image);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace crg
