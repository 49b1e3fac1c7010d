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

#ifndef CRG_ACTIVATION_HPP
#define CRG_ACTIVATION_HPP

#include <cstddef>
#include <cstdint>

#include "crg/tensor.hpp"

namespace crg {

/// The N target-layer maps, one per row, each flattened to d positions.
/// Row i is A^i; the concatenation of rows in order is X_D.
struct ActivationStack {
  RowMatrix maps;
  std::size_t map_height = 0;
  std::size_t map_width = 0;

  std::size_t num_maps() const { return static_cast<std::size_t>(maps.rows()); }
  std::size_t positions() const { return static_cast<std::size_t>(maps.cols()); }

  /// X_D as a [N, h, w] tensor.
  Tensor as_tensor() const;

  /// X_S: every map keeps the positions whose bit is set in mask, zero elsewhere.
  RowMatrix masked(std::uint64_t mask) const;

  static ActivationStack from_tensor(const Tensor& t);
};

}  // namespace crg

#endif  // CRG_ACTIVATION_HPP
