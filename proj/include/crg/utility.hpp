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

#ifndef CRG_UTILITY_HPP
#define CRG_UTILITY_HPP

#include <cstddef>
#include <string>
#include <string_view>

#include "crg/autodiff.hpp"
#include "crg/tensor.hpp"

namespace crg {

enum class UtilityKind { PreSoftmax, PostSoftmax, LogSoftmax, Rest };

/// Names used on the command line: pre, post, logpost, rest.
std::string to_string(UtilityKind kind);
UtilityKind parse_utility(std::string_view name);

struct UtilitySpec {
  std::size_t target_class = 0;
  UtilityKind kind = UtilityKind::Rest;
};

/// Differentiable utility of a logit vector:
///   pre      y_c
///   post     softmax(y)_c
///   logpost  y_c - logsumexp(y)
///   rest     y_c + (y_c - logsumexp(y))
ad::Var utility(ad::Var logits, const UtilitySpec& spec);

double compute_utility(const Tensor& logits, const UtilitySpec& spec);

/// softmax(y), max-shifted.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

}  // namespace crg

#endif  // CRG_UTILITY_HPP
