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

#include "crg/utility.hpp"

#include <stdexcept>

namespace crg {

std::string to_string(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::PreSoftmax: return "pre";
    case UtilityKind::PostSoftmax: return "post";
    case UtilityKind::LogSoftmax: return "logpost";
    case UtilityKind::Rest: return "rest";
  }
  return "unknown";
}

UtilityKind parse_utility(std::string_view name) {
  if (name == "pre") return UtilityKind::PreSoftmax;
  if (name == "post") return UtilityKind::PostSoftmax;
  if (name == "logpost") return UtilityKind::LogSoftmax;
  if (name == "rest") return UtilityKind::Rest;
  throw std::invalid_argument("unknown utility '" + std::string(name) + "' (expected pre, post, logpost or rest)");
}

ad::Var utility(ad::Var logits, const UtilitySpec& spec) {
  if (logits.value().rank() != 1 || logits.value().size() == 0) {
    throw ShapeError("utility: logits must be a non-empty vector, got " + to_string(logits.shape()));
  }
  const std::size_t classes = logits.value().size();
  if (spec.target_class >= classes) {
    throw std::out_of_range("utility: class " + std::to_string(spec.target_class) + " out of range for " +
                            std::to_string(classes) + " logits");
  }
  const ad::Var yc = ad::index(logits, spec.target_class);
  switch (spec.kind) {
    case UtilityKind::PreSoftmax:
      return yc;
    case UtilityKind::PostSoftmax:
      return ad::index(ad::softmax(logits), spec.target_class);
    case UtilityKind::LogSoftmax:
      return ad::sub(yc, ad::logsumexp(logits));
    case UtilityKind::Rest:
      return ad::add(yc, ad::sub(yc, ad::logsumexp(logits)));
  }
  throw std::logic_error("unhandled utility kind");
}

double compute_utility(const Tensor& logits, const UtilitySpec& spec) {
  ad::Tape tape;
  return utility(tape.constant(logits), spec).value().item();
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace crg
