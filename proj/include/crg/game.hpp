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

// Cooperative games over spatial positions and their Shapley values:
// exact enumeration, permutation Monte Carlo, and the first- and
// second-order Taylor closed forms.

#ifndef CRG_GAME_HPP
#define CRG_GAME_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crg/activation.hpp"
#include "crg/model_zoo.hpp"
#include "crg/tensor.hpp"
#include "crg/utility.hpp"

namespace crg {

/// Membership bitmask over at most 63 players.
class Coalition {
 public:
  static constexpr std::size_t kMaxPlayers = 63;

  Coalition() = default;
  Coalition(std::uint64_t bits, std::size_t players);

  static Coalition empty(std::size_t players) { return {0, players}; }
  static Coalition full(std::size_t players);

  std::uint64_t bits() const { return bits_; }
  std::size_t players() const { return players_; }
  std::size_t size() const;
  bool contains(std::size_t j) const { return (bits_ >> j) & 1u; }
  Coalition with(std::size_t j) const { return {bits_ | (std::uint64_t{1} << j), players_}; }
  Coalition without(std::size_t j) const { return {bits_ & ~(std::uint64_t{1} << j), players_}; }

 private:
  std::uint64_t bits_ = 0;
  std::size_t players_ = 0;
};

class CooperativeGame {
 public:
  using Utility = std::function<double(const Coalition&)>;

  /// The utility must be deterministic and safe to call concurrently.
  CooperativeGame(std::size_t players, Utility utility);

  std::size_t players() const { return players_; }
  double operator()(const Coalition& s) const { return utility_(s); }
  double operator()(std::uint64_t bits) const { return utility_(Coalition(bits, players_)); }
  double empty_value() const { return empty_value_; }
  double grand_value() const { return grand_value_; }

 private:
  std::size_t players_;
  Utility utility_;
  double empty_value_;
  double grand_value_;
};

enum class ShapleyMethod { Exact, MonteCarlo, FirstOrder, SecondOrder };

std::string to_string(ShapleyMethod method);

struct ShapleyVector {
  Eigen::VectorXd values;
  ShapleyMethod method = ShapleyMethod::Exact;
  std::size_t samples = 0;     // Monte Carlo only
  Eigen::VectorXd std_errors;  // Monte Carlo only

  double total() const { return values.sum(); }
};

inline constexpr std::size_t kMaxExactPlayers = 20;

/// Raised when exact enumeration would exceed the player guard rail.
class CostError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// U(S) for every S, indexed by the bitmask. Evaluated in parallel.
std::vector<double> coalition_table(const CooperativeGame& game);

/// s! (d - s - 1)! / d!, the weight of a coalition of size s not containing
/// the player, computed through log-factorials.
double coalition_weight(std::size_t players, std::size_t size);

ShapleyVector shapley_exact(const CooperativeGame& game);
ShapleyVector shapley_exact(std::size_t players, std::span<const double> table);

/// Mean marginal contribution over uniformly sampled permutations. The k-th
/// permutation is drawn from a generator seeded by (seed, k), so results do
/// not depend on the worker count.
ShapleyVector shapley_mc(const CooperativeGame& game, std::size_t samples, std::uint64_t seed);

/// phi_j = sum_i [U'(X_D)]^i_j A^i_j.
ShapleyVector shapley_first_order(const Tensor& grad, const ActivationStack& stack);

/// phi_j = sum_i [U'(X_D) - 1/2 X_D^T H_D]^i_j A^i_j, with H_D X_D supplied
/// as hvp (H_D is symmetric, so it equals X_D^T H_D).
ShapleyVector shapley_second_order(const Tensor& grad, const Tensor& hvp, const ActivationStack& stack);

/// Zero-ablation game over the d positions of the tap: U(S) is the utility
/// of the logits obtained from X_S.
struct SpatialGame {
  CooperativeGame game;
  ActivationStack activations;
  UtilitySpec spec;
};

SpatialGame make_spatial_game(const ToyModel& model, const Tensor& image, const UtilitySpec& spec);

struct AxiomCheck {
  std::string axiom;
  bool passed = true;
  double max_error = 0.0;
  std::size_t cases = 0;  // dummy players, symmetric pairs, or linearity pairs examined
};

struct AxiomReport {
  std::vector<AxiomCheck> checks;
  bool all_passed() const;
};

/// A second game for the linearity check: phi(alpha U + beta V) against
/// alpha phi(U) + beta phi(V).
struct LinearityCase {
  const CooperativeGame* other = nullptr;
  double alpha = 1.0;
  double beta = 1.0;
};

/// Checks Efficiency, Dummy, Symmetry and Linearity of exact values with a
/// relative tolerance scaled by 1 + the largest |U(S)| involved.
AxiomReport axiom_suite(const CooperativeGame& game, const ShapleyVector& values,
                        std::span<const LinearityCase> linearity = {}, double tolerance = 1e-9);

}  // namespace crg

#endif  // CRG_GAME_HPP
