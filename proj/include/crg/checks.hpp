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

// Invariant suites shared by the command-line checks and the acceptance
// tests. Each check is deterministic in its seed; reports carry no timings.

#ifndef CRG_CHECKS_HPP
#define CRG_CHECKS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "crg/autodiff.hpp"
#include "crg/game.hpp"
#include "crg/model_zoo.hpp"
#include "crg/tensor.hpp"

namespace crg::checks {

struct CheckResult {
  std::string name;
  bool passed = true;
  nlohmann::json detail = nlohmann::json::object();
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool passed() const;
  nlohmann::json to_json() const;
};

/// Uniform [0, 1) image of the given layout.
Tensor synthetic_image(const InputSpec& spec, std::uint64_t seed);

/// Starts from synthetic_image(seed) and runs sign-gradient ascent on
/// log softmax(y)_c until class c leads the runner-up by target_margin or
/// max_steps is exhausted. c is the predicted class, or whichever class
/// reaches the largest margin when the predicted one falls short. Pixels are not
/// clamped: the result is a probe tensor, not a displayable image.
Tensor confident_image(const ToyModel& model, std::uint64_t seed, double target_margin = 0.5,
                       std::size_t max_steps = 2000, double step = 0.05);

/// Gap between the largest and second-largest entry of a logit vector.
double logit_margin(const Tensor& logits);

/// Random table game with one dummy player and one interchangeable pair
/// (when d >= 3), U(empty) drawn like every other entry.
CooperativeGame random_table_game(std::size_t players, std::uint64_t seed);

/// U(x) = b^T x + 1/2 x^T M x over the flattened stack, M symmetric; M = 0
/// when linear is set.
struct QuadraticUtility {
  Eigen::VectorXd b;
  RowMatrix m;

  double operator()(const Eigen::VectorXd& x) const { return b.dot(x) + 0.5 * x.dot(m * x); }
  ad::Var build(ad::Var x) const;
};

QuadraticUtility random_quadratic(std::size_t dims, std::uint64_t seed, bool linear);

/// A random smooth scalar function of a vector input built from the smooth
/// primitives; the same seed always builds the same graph.
struct SmoothGraph {
  std::uint64_t seed = 0;
  std::size_t inputs = 0;

  ad::Var build(ad::Var x) const;
  double eval(const Tensor& x) const;
};

/// Relative distance max|a - b| / max(max|b|, floor).
double relative_error(const Eigen::VectorXd& got, const Eigen::VectorXd& expected, double floor = 1e-300);

CheckResult shapley_axioms(std::size_t games, std::size_t max_players, std::uint64_t seed, double tolerance = 1e-9);
CheckResult second_order_exactness(const std::vector<std::size_t>& sizes, std::size_t per_size, std::uint64_t seed,
                                   double tolerance = 1e-9);
CheckResult first_order_exactness(const std::vector<std::size_t>& sizes, std::size_t per_size, std::uint64_t seed,
                                  double tolerance = 1e-12);
CheckResult spatial_game_oracle(std::uint64_t seed, double tolerance = 1e-9);
CheckResult monte_carlo_convergence(std::size_t players, std::size_t samples, const std::vector<std::uint64_t>& seeds,
                                    double sigmas = 4.0);

CheckResult gradient_vs_finite_differences(std::size_t graphs, std::uint64_t seed, double tolerance = 1e-6);
CheckResult hvp_vs_finite_differences(std::size_t graphs, std::uint64_t seed, double tolerance = 1e-4,
                                      double symmetry_tolerance = 1e-9);
CheckResult piecewise_linear_zero_hvp(std::size_t trials, std::uint64_t seed);
CheckResult tape_replay_determinism(std::size_t graphs, std::uint64_t seed);

struct IdentityMatrix {
  std::vector<Architecture> architectures{Architecture::CnnSmooth, Architecture::MlpSmooth};
  std::vector<std::size_t> classes{2, 3, 5};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
};

CheckResult theorem3_identity(const IdentityMatrix& matrix, double tolerance = 1e-8);
CheckResult rest_identity(const IdentityMatrix& matrix, double tolerance = 1e-8);

/// Logits scaled by 50: post-softmax heatmap sup-norm must fall below
/// vanish_below, the ReST heatmap must stay above survive_above.
CheckResult gradient_vanishing_probe(const IdentityMatrix& matrix, double vanish_below = 1e-8,
                                     double survive_above = 1e-3);

CheckResult collapse_identities(const std::vector<std::uint64_t>& seeds, double tolerance = 1e-12);

SuiteReport shapley_verify_suite(std::uint64_t seed);
SuiteReport hvp_check_suite(std::uint64_t seed, std::size_t graphs);
SuiteReport theorem_check_suite(std::size_t seeds);

}  // namespace crg::checks

#endif  // CRG_CHECKS_HPP
