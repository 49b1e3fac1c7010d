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

// Writes a deterministic set of blob images: make_test_images DIR COUNT H W SEED

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "crg/image_io.hpp"

int main(int argc, char** argv) {
  if (argc != 6) {
    std::fprintf(stderr, "usage: %s DIR COUNT HEIGHT WIDTH SEED\n", argv[0]);
    return 2;
  }
  const std::string dir = argv[1];
  const std::size_t count = std::stoul(argv[2]);
  const std::size_t h = std::stoul(argv[3]);
  const std::size_t w = std::stoul(argv[4]);
  std::mt19937_64 rng(std::stoull(argv[5]));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 0; n < count; ++n) {
    crg::Tensor t({3, h, w});
    for (int blob = 0; blob < 2; ++blob) {
      const double cy = u(rng) * static_cast<double>(h), cx = u(rng) * static_cast<double>(w);
      const double radius = 1.0 + u(rng) * static_cast<double>(std::min(h, w)) / 3.0;
      const double colour[3] = {u(rng), u(rng), u(rng)};
      for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t x = 0; x < w; ++x) {
            const double r2 = (static_cast<double>(y) - cy) * (static_cast<double>(y) - cy) +
                              (static_cast<double>(x) - cx) * (static_cast<double>(x) - cx);
            t[(c * h + y) * w + x] += colour[c] * std::exp(-r2 / (2 * radius * radius));
          }
    }
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = std::min(1.0, t[k] + 0.1 * u(rng));
    char name[32];
    std::snprintf(name, sizeof name, "/img_%03zu.ppm", n);
    crg::write_image(dir + name, crg::Image::from_tensor(t));
  }
  return 0;
}
