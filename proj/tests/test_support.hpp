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

#ifndef CRG_TESTS_TEST_SUPPORT_HPP
#define CRG_TESTS_TEST_SUPPORT_HPP

#include <cstdint>
#include <initializer_list>
#include <string>

#include <gtest/gtest.h>

#include "crg/activation.hpp"
#include "crg/tensor.hpp"

namespace crg::testing {

/// Elementwise |a - b| <= tol with shapes compared first.
::testing::AssertionResult near(const Tensor& a, const Tensor& b, double tol);
::testing::AssertionResult near(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol);
::testing::AssertionResult near(const Eigen::VectorXd& a, std::initializer_list<double> b, double tol);

/// N maps of length d laid out as 1 x d.
ActivationStack stack_of(std::initializer_list<std::initializer_list<double>> rows);

/// Deterministic uniform [lo, hi) tensor.
Tensor random_tensor(const Shape& shape, std::uint64_t seed, double lo = 0.0, double hi = 1.0);

/// Fresh empty directory under the system temp dir.
std::string temp_dir(const std::string& name);

}  // namespace crg::testing

#endif  // CRG_TESTS_TEST_SUPPORT_HPP
