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

#include "crg/game.hpp"

#include <bit>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>
#include <utility>

#include "crg/parallel.hpp"

namespace crg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Uniform integer in [0, bound) by rejection, independent of the library's
/// distribution implementation.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

RowMatrix weight_matrix(const Tensor& t, const ActivationStack& stack, const char* what) {
  const std::size_t n = stack.num_maps(), d = stack.positions();
  const bool stacked = t.shape() == Shape{n, stack.map_height, stack.map_width};
  const bool flat = t.shape() == Shape{n, d};
  if (!stacked && !flat) {
    throw ShapeError(std::string(what) + " has shape " + to_string(t.shape()) + ", expected " +
                     to_string({n, stack.map_height, stack.map_width}));
  }
  return t.matrix(n, d);
}

}  // namespace

Coalition::Coalition(std::uint64_t bits, std::size_t players) : bits_(bits), players_(players) {
  if (players > kMaxPlayers) throw std::invalid_argument("coalition: at most 63 players");
  if (players < 64 && (bits >> players) != 0) throw std::invalid_argument("coalition: bits set beyond player count");
}

Coalition Coalition::full(std::size_t players) {
  return {players == 0 ? 0 : (~std::uint64_t{0} >> (64 - players)), players};
}

std::size_t Coalition::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

CooperativeGame::CooperativeGame(std::size_t players, Utility utility)
    : players_(players), utility_(std::move(utility)) {
  if (players > Coalition::kMaxPlayers) throw std::invalid_argument("cooperative game: at most 63 players");
  empty_value_ = utility_(Coalition::empty(players));
  grand_value_ = utility_(Coalition::full(players));
}

std::string to_string(ShapleyMethod method) {
  switch (method) {
    case ShapleyMethod::Exact: return "exact";
    case ShapleyMethod::MonteCarlo: return "mc";
    case ShapleyMethod::FirstOrder: return "first-order";
    case ShapleyMethod::SecondOrder: return "second-order";
  }
  return "unknown";
}

std::vector<double> coalition_table(const CooperativeGame& game) {
  const std::size_t d = game.players();
  if (d > kMaxExactPlayers) {
    std::ostringstream os;
    os << "exact enumeration over " << d << " players needs 2^" << d << " = " << (std::uint64_t{1} << d)
       << " utility evaluations; limit is " << kMaxExactPlayers << " players";
    throw CostError(os.str());
  }
  std::vector<double> table(std::size_t{1} << d);
  parallel_for(table.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) table[s] = game(static_cast<std::uint64_t>(s));
  });
  return table;
}

double coalition_weight(std::size_t players, std::size_t size) {
  const auto d = static_cast<double>(players);
  const auto s = static_cast<double>(size);
  return std::exp(std::lgamma(s + 1.0) + std::lgamma(d - s) - std::lgamma(d + 1.0));
}

ShapleyVector shapley_exact(std::size_t players, std::span<const double> table) {
  if (table.size() != (std::size_t{1} << players)) throw std::invalid_argument("shapley_exact: table size is not 2^d");
  std::vector<double> weights(players);
  for (std::size_t s = 0; s < players; ++s) weights[s] = coalition_weight(players, s);
  ShapleyVector out;
  out.method = ShapleyMethod::Exact;
  out.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(players));
  for (std::size_t s = 0; s < table.size(); ++s) {
    const double w = players ? weights[std::min<std::size_t>(std::popcount(s), players - 1)] : 0.0;
    for (std::size_t j = 0; j < players; ++j) {
      const std::size_t bit = std::size_t{1} << j;
      if (s & bit) continue;
      out.values[static_cast<Eigen::Index>(j)] += w * (table[s | bit] - table[s]);
    }
  }
  return out;
}

ShapleyVector shapley_exact(const CooperativeGame& game) {
  const std::vector<double> table = coalition_table(game);
  return shapley_exact(game.players(), table);
}

ShapleyVector shapley_mc(const CooperativeGame& game, std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("shapley_mc: need at least one sample");
  const std::size_t d = game.players();
  RowMatrix marginals(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(d));
  parallel_for(samples, [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> order(d);
    for (std::size_t k = begin; k < end; ++k) {
      std::mt19937_64 rng(splitmix64(seed ^ splitmix64(k)));
      for (std::size_t j = 0; j < d; ++j) order[j] = j;
      for (std::size_t j = d; j > 1; --j) std::swap(order[j - 1], order[uniform_below(rng, j)]);
      std::uint64_t bits = 0;
      double previous = game.empty_value();
      for (std::size_t j : order) {
        bits |= std::uint64_t{1} << j;
        const double current = game(bits);
        marginals(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = current - previous;
        previous = current;
      }
    }
  });
  ShapleyVector out;
  out.method = ShapleyMethod::MonteCarlo;
  out.samples = samples;
  out.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  out.std_errors = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < marginals.rows(); ++k) out.values += marginals.row(k).transpose();
  out.values /= static_cast<double>(samples);
  if (samples > 1) {
    for (Eigen::Index k = 0; k < marginals.rows(); ++k) {
      out.std_errors += (marginals.row(k).transpose() - out.values).cwiseAbs2();
    }
    out.std_errors = (out.std_errors / static_cast<double>(samples - 1) / static_cast<double>(samples)).cwiseSqrt();
  }
  return out;
}

ShapleyVector shapley_first_order(const Tensor& grad, const ActivationStack& stack) {
  const RowMatrix w = weight_matrix(grad, stack, "gradient");
  ShapleyVector out;
  out.method = ShapleyMethod::FirstOrder;
  out.values = w.cwiseProduct(stack.maps).colwise().sum().transpose();
  return out;
}

ShapleyVector shapley_second_order(const Tensor& grad, const Tensor& hvp, const ActivationStack& stack) {
  const RowMatrix w = weight_matrix(grad, stack, "gradient") - 0.5 * weight_matrix(hvp, stack, "hvp");
  ShapleyVector out;
  out.method = ShapleyMethod::SecondOrder;
  out.values = w.cwiseProduct(stack.maps).colwise().sum().transpose();
  return out;
}

SpatialGame make_spatial_game(const ToyModel& model, const Tensor& image, const UtilitySpec& spec) {
  const TapForward fwd = forward_with_tap(model, image);
  auto shared_model = std::make_shared<const ToyModel>(model);
  auto stack = std::make_shared<const ActivationStack>(fwd.activations);
  if (stack->positions() > Coalition::kMaxPlayers) {
    throw std::invalid_argument("spatial game: tap has more than 63 positions");
  }
  auto utility_of = [shared_model, stack, spec](const Coalition& s) {
    ad::Tape tape;
    Tensor masked({stack->num_maps(), stack->map_height, stack->map_width});
    masked.matrix(stack->num_maps(), stack->positions()) = stack->masked(s.bits());
    const ad::Var logits = post_tap_logits(*shared_model, tape.constant(std::move(masked)));
    return utility(logits, spec).value().item();
  };
  return SpatialGame{CooperativeGame(stack->positions(), utility_of), *stack, spec};
}

bool AxiomReport::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

AxiomReport axiom_suite(const CooperativeGame& game, const ShapleyVector& values,
                        std::span<const LinearityCase> linearity, double tolerance) {
  const std::size_t d = game.players();
  if (static_cast<std::size_t>(values.values.size()) != d) {
    throw ShapeError("axiom_suite: " + std::to_string(values.values.size()) + " values for " + std::to_string(d) +
                     " players");
  }
  const std::vector<double> table = coalition_table(game);
  double scale = 0.0;
  for (double v : table) scale = std::max(scale, std::abs(v));
  const double tol = tolerance * (1.0 + scale);
  const auto& phi = values.values;
  AxiomReport report;

  AxiomCheck efficiency{"efficiency"};
  const double total = game.grand_value() - game.empty_value();
  efficiency.max_error = std::abs(phi.sum() - total);
  efficiency.passed = efficiency.max_error <= tolerance * (1.0 + std::abs(total));
  efficiency.cases = 1;
  report.checks.push_back(efficiency);

  AxiomCheck dummy{"dummy"};
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    bool is_dummy = true;
    for (std::size_t s = 0; s < table.size() && is_dummy; ++s) {
      if (!(s & bit) && std::abs(table[s | bit] - table[s]) > tol) is_dummy = false;
    }
    if (!is_dummy) continue;
    ++dummy.cases;
    dummy.max_error = std::max(dummy.max_error, std::abs(phi[static_cast<Eigen::Index>(i)]));
  }
  dummy.passed = dummy.max_error <= tol;
  report.checks.push_back(dummy);

  AxiomCheck symmetry{"symmetry"};
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const std::size_t bi = std::size_t{1} << i, bj = std::size_t{1} << j;
      bool interchangeable = true;
      for (std::size_t s = 0; s < table.size() && interchangeable; ++s) {
        if ((s & bi) || (s & bj)) continue;
        if (std::abs(table[s | bi] - table[s | bj]) > tol) interchangeable = false;
      }
      if (!interchangeable) continue;
      ++symmetry.cases;
      symmetry.max_error = std::max(
          symmetry.max_error, std::abs(phi[static_cast<Eigen::Index>(i)] - phi[static_cast<Eigen::Index>(j)]));
    }
  }
  symmetry.passed = symmetry.max_error <= tol;
  report.checks.push_back(symmetry);

  AxiomCheck linear{"linearity"};
  for (const LinearityCase& c : linearity) {
    if (!c.other || c.other->players() != d) throw std::invalid_argument("axiom_suite: linearity game has wrong size");
    const std::vector<double> other = coalition_table(*c.other);
    std::vector<double> combined(table.size());
    double combined_scale = 0.0;
    for (std::size_t s = 0; s < table.size(); ++s) {
      combined[s] = c.alpha * table[s] + c.beta * other[s];
      combined_scale = std::max(combined_scale, std::abs(combined[s]));
    }
    const Eigen::VectorXd expected = c.alpha * phi + c.beta * shapley_exact(d, other).values;
    const Eigen::VectorXd got = shapley_exact(d, combined).values;
    const double err = (got - expected).cwiseAbs().maxCoeff();
    ++linear.cases;
    linear.max_error = std::max(linear.max_error, err);
    if (err > tolerance * (1.0 + combined_scale)) linear.passed = false;
  }
  report.checks.push_back(linear);
  return report;
}

}  // namespace crg
