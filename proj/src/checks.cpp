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

#include "crg/checks.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "crg/cam.hpp"
#include "crg/utility.hpp"

namespace crg::checks {

namespace {

using nlohmann::json;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

RowMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale) {
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -scale, scale);
  return m;
}

Tensor vector_tensor(const Eigen::VectorXd& v) { return Tensor::vector(v); }

double sup_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Activation stack of N random maps over d positions laid out as 1 x d.
ActivationStack random_stack(std::mt19937_64& rng, std::size_t maps, std::size_t positions) {
  ActivationStack s;
  s.maps = random_matrix(rng, maps, positions, 1.0);
  s.map_height = 1;
  s.map_width = positions;
  return s;
}

struct ClosedFormCase {
  Eigen::VectorXd exact;
  Eigen::VectorXd closed;
  double efficiency_error = 0.0;
  double total = 0.0;
};

ClosedFormCase quadratic_case(std::size_t players, std::uint64_t seed, bool linear) {
  constexpr std::size_t kMaps = 2;
  std::mt19937_64 rng(seed);
  const ActivationStack stack = random_stack(rng, kMaps, players);
  const QuadraticUtility q = random_quadratic(kMaps * players, seed ^ 0x5bd1e995ull, linear);

  auto flat = [](const RowMatrix& m) { return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()).eval(); };
  const CooperativeGame game(players, [&](const Coalition& s) { return q(flat(stack.masked(s.bits()))); });

  ad::Tape tape;
  const ad::Var x = tape.input("x", stack.as_tensor());
  const ad::Var u = q.build(ad::reshape(x, {kMaps * players}));
  const Tensor g = ad::gradient(u, x);

  ClosedFormCase out;
  out.exact = shapley_exact(game).values;
  if (linear) {
    out.closed = shapley_first_order(g, stack).values;
  } else {
    out.closed = shapley_second_order(g, ad::hvp(u, x, stack.as_tensor()), stack).values;
  }
  out.total = game.grand_value() - game.empty_value();
  out.efficiency_error = std::abs(out.closed.sum() - out.total);
  return out;
}

CheckResult closed_form_exactness(const char* name, const std::vector<std::size_t>& sizes, std::size_t per_size,
                                  std::uint64_t seed, double tolerance, bool linear) {
  CheckResult r{name};
  double worst = 0.0, worst_efficiency = 0.0;
  std::size_t cases = 0;
  for (std::size_t d : sizes) {
    for (std::size_t k = 0; k < per_size; ++k) {
      const ClosedFormCase c = quadratic_case(d, seed + 1000 * d + k, linear);
      worst = std::max(worst, relative_error(c.closed, c.exact));
      worst_efficiency = std::max(worst_efficiency, c.efficiency_error / (1.0 + std::abs(c.total)));
      ++cases;
    }
  }
  r.passed = worst <= tolerance && worst_efficiency <= 1e-9;
  r.detail = {{"cases", cases},
              {"sizes", sizes},
              {"max_relative_error", worst},
              {"max_efficiency_error", worst_efficiency},
              {"tolerance", tolerance}};
  return r;
}

std::size_t argmax(const Tensor& t) {
  return static_cast<std::size_t>(std::max_element(t.data().begin(), t.data().end()) - t.data().begin());
}

}  // namespace

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

nlohmann::json SuiteReport::to_json() const {
  json list = json::array();
  for (const auto& c : checks) {
    json entry = c.detail;
    entry["name"] = c.name;
    entry["passed"] = c.passed;
    list.push_back(entry);
  }
  return {{"suite", suite}, {"passed", passed()}, {"checks", list}};
}

Tensor synthetic_image(const InputSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tensor t(spec.shape());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = uniform(rng, 0.0, 1.0);
  return t;
}

double logit_margin(const Tensor& logits) {
  if (logits.size() < 2) return INFINITY;
  Eigen::VectorXd v = logits.data();
  Eigen::Index top = 0;
  const double best = v.maxCoeff(&top);
  v[top] = -INFINITY;
  return best - v.maxCoeff();
}

Tensor confident_image(const ToyModel& model, std::uint64_t seed, double target_margin, std::size_t max_steps,
                       double step) {
  const Tensor start = synthetic_image(model.input, seed);
  auto margin_for = [&](const Tensor& logits, std::size_t c) {
    return argmax(logits) == c ? logit_margin(logits) : -logit_margin(logits);
  };
  auto ascend = [&](std::size_t target) {
    Tensor x = start;
    for (std::size_t it = 0; it < max_steps; ++it) {
      ad::Tape tape;
      const ad::Var image = tape.input("image", x);
      const ad::Var logits = model_logits(model, image);
      if (margin_for(logits.value(), target) >= target_margin) break;
      const Tensor g = ad::gradient(utility(logits, {target, UtilityKind::LogSoftmax}), image);
      for (std::size_t k = 0; k < x.size(); ++k) x[k] += step * (g[k] > 0.0 ? 1.0 : (g[k] < 0.0 ? -1.0 : 0.0));
    }
    return std::make_pair(margin_for(predict(model, x), target), x);
  };
  // The predicted class first; other classes only if it cannot be separated
  // (its logit row may lie inside the hull of the others).
  const std::size_t predicted = argmax(predict(model, start));
  auto best = ascend(predicted);
  for (std::size_t c = 0; c < model.num_classes && best.first < target_margin; ++c) {
    if (c == predicted) continue;
    auto alt = ascend(c);
    if (alt.first > best.first) best = std::move(alt);
  }
  return best.second;
}

CooperativeGame random_table_game(std::size_t players, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto table = std::make_shared<std::vector<double>>(std::size_t{1} << players);
  for (double& v : *table) v = uniform(rng, -1.0, 1.0);
  const bool structured = players >= 3;
  const std::uint64_t dummy_bit = structured ? (std::uint64_t{1} << (players - 1)) : 0;
  return CooperativeGame(players, [table, structured, dummy_bit](const Coalition& s) {
    std::uint64_t bits = s.bits() & ~dummy_bit;
    if (structured && ((bits & 1u) != ((bits >> 1) & 1u))) bits = (bits & ~std::uint64_t{3}) | 1u;
    return (*table)[bits];
  });
}

ad::Var QuadraticUtility::build(ad::Var x) const {
  ad::Tape& tape = x.tape();
  const std::size_t n = static_cast<std::size_t>(b.size());
  const ad::Var linear = ad::dot(tape.constant(Tensor::vector(b)), x);
  Tensor mt({n, n});
  mt.matrix(n, n) = m;
  const ad::Var mx = ad::reshape(ad::matmul(tape.constant(mt), ad::reshape(x, {n, 1})), {n});
  return ad::add(linear, ad::scale(ad::dot(x, mx), 0.5));
}

QuadraticUtility random_quadratic(std::size_t dims, std::uint64_t seed, bool linear) {
  std::mt19937_64 rng(seed);
  QuadraticUtility q;
  q.b = random_vector(rng, dims);
  if (linear) {
    q.m = RowMatrix::Zero(static_cast<Eigen::Index>(dims), static_cast<Eigen::Index>(dims));
  } else {
    const RowMatrix r = random_matrix(rng, dims, dims, 1.0);
    q.m = 0.5 * (r + r.transpose());
  }
  return q;
}

ad::Var SmoothGraph::build(ad::Var x) const {
  ad::Tape& tape = x.tape();
  std::mt19937_64 rng(seed);
  ad::Var h = x;
  std::size_t width = inputs;
  const std::size_t layers = 1 + rng() % 3;
  for (std::size_t l = 0; l < layers; ++l) {
    switch (rng() % 7) {
      case 0: {
        const std::size_t out = 2 + rng() % 4;
        Tensor m({out, width});
        m.matrix(out, width) = random_matrix(rng, out, width, 1.0 / std::sqrt(static_cast<double>(width)));
        h = ad::tanh(ad::reshape(ad::matmul(tape.constant(m), ad::reshape(h, {width, 1})), {out}));
        width = out;
        break;
      }
      case 1:
        h = ad::mul(ad::sigmoid(h), h);
        break;
      case 2:
        h = ad::add(ad::silu(h), ad::softplus(ad::scale(h, 0.5)));
        break;
      case 3:
        h = ad::exp(ad::scale(h, 0.3));
        break;
      case 4:
        h = ad::softmax(h);
        break;
      case 5:
        h = ad::log(ad::offset(ad::softplus(h), 1.0));
        break;
      default:
        h = ad::mul(h, ad::tanh(ad::offset(h, 0.2)));
        break;
    }
  }
  switch (rng() % 3) {
    case 0:
      return ad::logsumexp(h);
    case 1:
      return ad::dot(h, tape.constant(vector_tensor(random_vector(rng, width))));
    default:
      return ad::sum(ad::mul(h, h));
  }
}

double SmoothGraph::eval(const Tensor& x) const {
  ad::Tape tape;
  return build(tape.input("x", x)).value().item();
}

double relative_error(const Eigen::VectorXd& got, const Eigen::VectorXd& expected, double floor) {
  if (got.size() != expected.size()) return INFINITY;
  if (got.size() == 0) return 0.0;
  const double diff = (got - expected).cwiseAbs().maxCoeff();
  if (diff == 0.0) return 0.0;
  return diff / std::max(sup_norm(expected), floor);
}

CheckResult shapley_axioms(std::size_t games, std::size_t max_players, std::uint64_t seed, double tolerance) {
  CheckResult r{"shapley_axioms"};
  std::size_t dummy_cases = 0, symmetry_cases = 0;
  json worst = {{"efficiency", 0.0}, {"dummy", 0.0}, {"symmetry", 0.0}, {"linearity", 0.0}};
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < games; ++k) {
    const std::size_t d = 1 + rng() % max_players;
    const CooperativeGame game = random_table_game(d, seed * 7919 + k);
    const CooperativeGame other = random_table_game(d, seed * 7919 + k + 0x10000);
    const LinearityCase lin[] = {{&other, uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0)}, {&game, 1.0, 1.0}};
    const AxiomReport report = axiom_suite(game, shapley_exact(game), lin, tolerance);
    for (const AxiomCheck& c : report.checks) {
      worst[c.axiom] = std::max(worst[c.axiom].get<double>(), c.max_error);
      if (c.axiom == "dummy") dummy_cases += c.cases;
      if (c.axiom == "symmetry") symmetry_cases += c.cases;
    }
    if (!report.all_passed()) r.passed = false;
  }
  r.detail = {{"games", games},
              {"max_players", max_players},
              {"dummy_players_checked", dummy_cases},
              {"symmetric_pairs_checked", symmetry_cases},
              {"max_error", worst},
              {"tolerance", tolerance}};
  return r;
}

CheckResult second_order_exactness(const std::vector<std::size_t>& sizes, std::size_t per_size, std::uint64_t seed,
                                   double tolerance) {
  return closed_form_exactness("second_order_exactness", sizes, per_size, seed, tolerance, false);
}

CheckResult first_order_exactness(const std::vector<std::size_t>& sizes, std::size_t per_size, std::uint64_t seed,
                                  double tolerance) {
  return closed_form_exactness("first_order_exactness", sizes, per_size, seed, tolerance, true);
}

CheckResult spatial_game_oracle(std::uint64_t seed, double tolerance) {
  CheckResult r{"spatial_game_oracle"};
  const ToyModel model = build_model(Architecture::CnnRelu, 3, seed);
  const Tensor image = synthetic_image(model.input, seed + 17);
  const UtilitySpec spec{seed % 3, UtilityKind::PreSoftmax};

  const SpatialGame sg = make_spatial_game(model, image, spec);
  const Eigen::VectorXd exact = shapley_exact(sg.game).values;

  const TapForward fwd = forward_with_tap(model, image);
  const Tensor g = ad::gradient(utility(fwd.logits, spec), fwd.tap);
  const Eigen::VectorXd first = shapley_first_order(g, fwd.activations).values;
  const Eigen::VectorXd scam = explain(model, image, spec, {MethodKind::ShapleyCam}).pre_relu;
  const Eigen::VectorXd scam_h = explain(model, image, spec, {MethodKind::ShapleyCamH}).pre_relu;

  const double e_first = relative_error(first, exact);
  const double e_scam = relative_error(scam, exact);
  const double e_scam_h = relative_error(scam_h, exact);
  const double efficiency = std::abs(exact.sum() - (sg.game.grand_value() - sg.game.empty_value()));
  r.passed = e_first <= tolerance && e_scam <= tolerance && e_scam_h <= tolerance;
  r.detail = {{"players", sg.game.players()},
              {"first_order_vs_exact", e_first},
              {"shapleycam_vs_exact", e_scam},
              {"shapleycam_h_vs_exact", e_scam_h},
              {"efficiency_error", efficiency},
              {"tolerance", tolerance}};
  return r;
}

CheckResult monte_carlo_convergence(std::size_t players, std::size_t samples, const std::vector<std::uint64_t>& seeds,
                                    double sigmas) {
  CheckResult r{"monte_carlo_convergence"};
  double worst_z = 0.0;
  std::size_t violations = 0;
  for (std::uint64_t s : seeds) {
    const CooperativeGame game = random_table_game(players, 0xC0FFEEull + s);
    const Eigen::VectorXd exact = shapley_exact(game).values;
    const ShapleyVector mc = shapley_mc(game, samples, s);
    for (Eigen::Index j = 0; j < exact.size(); ++j) {
      const double diff = std::abs(mc.values[j] - exact[j]);
      const double se = mc.std_errors[j];
      if (se == 0.0) {
        if (diff > 1e-12) ++violations;
        continue;
      }
      worst_z = std::max(worst_z, diff / se);
      if (diff > sigmas * se) ++violations;
    }
  }
  r.passed = violations == 0;
  r.detail = {{"players", players},
              {"samples", samples},
              {"seeds", seeds.size()},
              {"max_z", worst_z},
              {"violations", violations},
              {"sigmas", sigmas}};
  return r;
}

CheckResult gradient_vs_finite_differences(std::size_t graphs, std::uint64_t seed, double tolerance) {
  CheckResult r{"gradient_vs_finite_differences"};
  double worst = 0.0;
  for (std::size_t k = 0; k < graphs; ++k) {
    std::mt19937_64 rng(seed * 104729 + k);
    const SmoothGraph graph{seed * 104729 + k, 2 + rng() % 5};
    const Tensor x = vector_tensor(random_vector(rng, graph.inputs));
    ad::Tape tape;
    const ad::Var xv = tape.input("x", x);
    const Tensor g = ad::gradient(graph.build(xv), xv);
    const double h = 1e-5 * (1.0 + sup_norm(x.data()));
    const Tensor fd = ad::finite_diff_gradient([&](const Tensor& p) { return graph.eval(p); }, x, h);
    worst = std::max(worst, (g.data() - fd.data()).norm() / (fd.data().norm() + 1e-12));
  }
  r.passed = worst <= tolerance;
  r.detail = {{"graphs", graphs}, {"max_relative_error", worst}, {"tolerance", tolerance}};
  return r;
}

CheckResult hvp_vs_finite_differences(std::size_t graphs, std::uint64_t seed, double tolerance,
                                      double symmetry_tolerance) {
  CheckResult r{"hvp_vs_finite_differences"};
  double worst = 0.0, worst_sym = 0.0;
  for (std::size_t k = 0; k < graphs; ++k) {
    std::mt19937_64 rng(seed * 7727 + k);
    const SmoothGraph graph{seed * 7727 + k, 2 + rng() % 5};
    const Tensor x = vector_tensor(random_vector(rng, graph.inputs));
    const Tensor v1 = vector_tensor(random_vector(rng, graph.inputs));
    const Tensor v2 = vector_tensor(random_vector(rng, graph.inputs));

    auto grad_at = [&](const Eigen::VectorXd& p) {
      ad::Tape tape;
      const ad::Var xv = tape.input("x", vector_tensor(p));
      return ad::gradient(graph.build(xv), xv).data();
    };
    ad::Tape tape;
    const ad::Var xv = tape.input("x", x);
    const ad::Var out = graph.build(xv);
    const Eigen::VectorXd hv1 = ad::hvp(out, xv, v1).data();
    const Eigen::VectorXd hv2 = ad::hvp(out, xv, v2).data();

    const double h = 1e-5 * (1.0 + sup_norm(x.data()));
    const Eigen::VectorXd fd = (grad_at(x.data() + h * v1.data()) - grad_at(x.data() - h * v1.data())) / (2.0 * h);
    worst = std::max(worst, (hv1 - fd).norm() / (hv1.norm() + 1e-12));

    const double a = v1.data().dot(hv2);
    const double b = v2.data().dot(hv1);
    worst_sym = std::max(worst_sym, std::abs(a - b) / (1.0 + std::abs(a)));
  }
  r.passed = worst <= tolerance && worst_sym <= symmetry_tolerance;
  r.detail = {{"graphs", graphs},
              {"max_relative_error", worst},
              {"max_symmetry_error", worst_sym},
              {"tolerance", tolerance},
              {"symmetry_tolerance", symmetry_tolerance}};
  return r;
}

CheckResult piecewise_linear_zero_hvp(std::size_t trials, std::uint64_t seed) {
  CheckResult r{"piecewise_linear_zero_hvp"};
  double worst = 0.0;
  for (std::size_t k = 0; k < trials; ++k) {
    std::mt19937_64 rng(seed * 31337 + k);
    const std::size_t n = 3 + rng() % 4, hidden = 2 + rng() % 4;
    ad::Tape tape;
    const ad::Var x = tape.input("x", vector_tensor(random_vector(rng, n)));
    Tensor m1({hidden, n});
    m1.matrix(hidden, n) = random_matrix(rng, hidden, n, 1.0);
    ad::Var h = ad::relu(ad::reshape(ad::matmul(tape.constant(m1), ad::reshape(x, {n, 1})), {hidden}));
    h = ad::add(h, tape.constant(vector_tensor(random_vector(rng, hidden))));
    const ad::Var pooled = ad::global_avg_pool(ad::reshape(ad::relu(h), {hidden, 1, 1}));
    const ad::Var out = ad::dot(pooled, tape.constant(vector_tensor(random_vector(rng, hidden))));
    const Tensor hv = ad::hvp(out, x, vector_tensor(random_vector(rng, n)));
    worst = std::max(worst, sup_norm(hv.data()));
  }
  r.passed = worst == 0.0;
  r.detail = {{"trials", trials}, {"max_abs_hvp", worst}};
  return r;
}

CheckResult tape_replay_determinism(std::size_t graphs, std::uint64_t seed) {
  CheckResult r{"tape_replay_determinism"};
  std::size_t mismatches = 0, nodes = 0;
  for (std::size_t k = 0; k < graphs; ++k) {
    std::mt19937_64 rng(seed * 15485863 + k);
    const SmoothGraph graph{seed * 15485863 + k, 2 + rng() % 5};
    const Tensor x = vector_tensor(random_vector(rng, graph.inputs));
    ad::Tape tape;
    const ad::Var xv = tape.input("x", x);
    const ad::Var out = graph.build(xv);
    ad::hvp(out, xv, x);  // backward nodes are replayed too
    const std::vector<Tensor> again = tape.replay();
    for (std::size_t i = 0; i < tape.size(); ++i) {
      if (!(again[i] == tape.node(i).value)) ++mismatches;
    }
    nodes += tape.size();
    if (graph.eval(x) != out.value().item()) ++mismatches;
  }
  const ToyModel model = build_model(Architecture::CnnSmooth, 3, seed);
  const TapForward a = forward_with_tap(model, synthetic_image(model.input, seed));
  const std::vector<Tensor> again = a.tape->replay();
  for (std::size_t i = 0; i < a.tape->size(); ++i) {
    if (!(again[i] == a.tape->node(i).value)) ++mismatches;
  }
  nodes += a.tape->size();
  r.passed = mismatches == 0;
  r.detail = {{"graphs", graphs}, {"nodes_replayed", nodes}, {"mismatches", mismatches}};
  return r;
}

CheckResult theorem3_identity(const IdentityMatrix& matrix, double tolerance) {
  CheckResult r{"theorem3_post_softmax_ensemble"};
  double worst = 0.0;
  std::size_t cases = 0;
  for (Architecture arch : matrix.architectures) {
    for (std::size_t classes : matrix.classes) {
      for (std::uint64_t s : matrix.seeds) {
        const ToyModel model = build_model(arch, classes, s);
        const Tensor image = synthetic_image(model.input, 1000 + s);
        for (MethodKind m : {MethodKind::GradCam, MethodKind::HiResCam}) {
          const HeatmapPair p = theorem3_ensemble(model, image, s % classes, {m});
          worst = std::max(worst, sup_norm(p.direct.pre_relu - p.composed.pre_relu));
          ++cases;
        }
      }
    }
  }
  r.passed = worst <= tolerance;
  r.detail = {{"cases", cases}, {"max_abs_error", worst}, {"tolerance", tolerance}};
  return r;
}

CheckResult rest_identity(const IdentityMatrix& matrix, double tolerance) {
  CheckResult r{"rest_decomposition"};
  double worst = 0.0;
  std::size_t cases = 0;
  for (Architecture arch : matrix.architectures) {
    for (std::size_t classes : matrix.classes) {
      for (std::uint64_t s : matrix.seeds) {
        const ToyModel model = build_model(arch, classes, s);
        const Tensor image = synthetic_image(model.input, 1000 + s);
        for (MethodKind m : {MethodKind::GradCam, MethodKind::HiResCam}) {
          const HeatmapPair p = rest_decomposition(model, image, s % classes, {m});
          worst = std::max(worst, sup_norm(p.direct.pre_relu - p.composed.pre_relu));
          ++cases;
        }
      }
    }
  }
  r.passed = worst <= tolerance;
  r.detail = {{"cases", cases}, {"max_abs_error", worst}, {"tolerance", tolerance}};
  return r;
}

CheckResult gradient_vanishing_probe(const IdentityMatrix& matrix, double vanish_below, double survive_above) {
  CheckResult r{"gradient_vanishing_probe"};
  double worst_post = 0.0;
  double weakest_rest = INFINITY;
  double margin = INFINITY;
  std::size_t cases = 0;
  for (Architecture arch : matrix.architectures) {
    for (std::size_t classes : matrix.classes) {
      for (std::uint64_t s : matrix.seeds) {
        ToyModel model = build_model(arch, classes, s);
        const Tensor image = confident_image(model, 2000 + s);
        model.logit_scale = 50.0;
        const std::size_t c = argmax(predict(model, image));
        margin = std::min(margin, logit_margin(predict(model, image)) / model.logit_scale);
        const double post = sup_norm(explain(model, image, {c, UtilityKind::PostSoftmax}, {MethodKind::GradCam}).pre_relu);
        const double rest = sup_norm(explain(model, image, {c, UtilityKind::Rest}, {MethodKind::GradCam}).pre_relu);
        worst_post = std::max(worst_post, post);
        weakest_rest = std::min(weakest_rest, rest);
        ++cases;
      }
    }
  }
  r.passed = worst_post < vanish_below && weakest_rest > survive_above;
  r.detail = {{"cases", cases},
              {"logit_scale", 50.0},
              {"min_unscaled_margin", margin},
              {"max_post_softmax_sup_norm", worst_post},
              {"min_rest_sup_norm", weakest_rest},
              {"vanish_below", vanish_below},
              {"survive_above", survive_above}};
  return r;
}

CheckResult collapse_identities(const std::vector<std::uint64_t>& seeds, double tolerance) {
  CheckResult r{"degenerate_collapse"};
  std::size_t shapley_mismatch = 0, not_optimal = 0;
  double worst_gap = 0.0;
  for (std::uint64_t s : seeds) {
    const ToyModel model = build_model(Architecture::CnnRelu, 3, s);
    const Tensor image = synthetic_image(model.input, 3000 + s);
    const UtilitySpec spec{s % 3, UtilityKind::PreSoftmax};
    const Heatmap gradcam = explain(model, image, spec, {MethodKind::GradCam});
    const Heatmap hirescam = explain(model, image, spec, {MethodKind::HiResCam});
    const Heatmap scam = explain(model, image, spec, {MethodKind::ShapleyCam});
    const Heatmap scam_h = explain(model, image, spec, {MethodKind::ShapleyCamH});
    if (scam.pre_relu != gradcam.pre_relu || scam.post_relu != gradcam.post_relu) ++shapley_mismatch;
    if (scam_h.pre_relu != hirescam.pre_relu || scam_h.post_relu != hirescam.post_relu) ++shapley_mismatch;
    worst_gap = std::max(worst_gap, sup_norm(gradcam.pre_relu - hirescam.pre_relu));
    const Explanation e = explain_weights(model, image, spec, {MethodKind::GradCam});
    if (!classify_crg(e.weights.values, e.activations).optimal) ++not_optimal;
  }
  r.passed = shapley_mismatch == 0 && not_optimal == 0 && worst_gap <= tolerance;
  r.detail = {{"seeds", seeds.size()},
              {"shapleycam_mismatches", shapley_mismatch},
              {"gradcam_vs_hirescam_max_abs", worst_gap},
              {"non_optimal_gap_taps", not_optimal},
              {"tolerance", tolerance}};
  return r;
}

SuiteReport shapley_verify_suite(std::uint64_t seed) {
  SuiteReport report{"shapley-verify", {}};
  std::vector<std::uint64_t> mc_seeds;
  for (std::uint64_t k = 0; k < 10; ++k) mc_seeds.push_back(seed + k);
  report.checks.push_back(shapley_axioms(50, 8, seed));
  report.checks.push_back(second_order_exactness({4, 8, 12}, 20, seed));
  report.checks.push_back(first_order_exactness({4, 8, 12}, 20, seed));
  report.checks.push_back(spatial_game_oracle(seed));
  report.checks.push_back(monte_carlo_convergence(6, 50000, mc_seeds));
  return report;
}

SuiteReport hvp_check_suite(std::uint64_t seed, std::size_t graphs) {
  SuiteReport report{"hvp-check", {}};
  report.checks.push_back(gradient_vs_finite_differences(graphs, seed));
  report.checks.push_back(hvp_vs_finite_differences(graphs, seed));
  report.checks.push_back(piecewise_linear_zero_hvp(graphs, seed));
  report.checks.push_back(tape_replay_determinism(std::min<std::size_t>(graphs, 20), seed));
  return report;
}

SuiteReport theorem_check_suite(std::size_t seeds) {
  SuiteReport report{"theorem-check", {}};
  IdentityMatrix matrix;
  matrix.seeds.clear();
  for (std::size_t s = 0; s < seeds; ++s) matrix.seeds.push_back(s);
  std::vector<std::uint64_t> collapse_seeds(matrix.seeds.begin(), matrix.seeds.end());
  report.checks.push_back(theorem3_identity(matrix));
  report.checks.push_back(rest_identity(matrix));
  report.checks.push_back(gradient_vanishing_probe(matrix));
  report.checks.push_back(collapse_identities(collapse_seeds));
  return report;
}

}  // namespace crg::checks
