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

// Reverse-mode automatic differentiation over dense tensors.
//
// Every operation appends a node to a Tape and computes its value eagerly.
// Backward sweeps are themselves recorded as tape operations, so the result
// of grad() is differentiable again; hvp() uses this to form H·v as the
// gradient of <grad f, v>.
//
// A Tape is confined to one thread. Var handles hold a raw pointer to their
// tape, so tapes are neither copyable nor movable.

#ifndef CRG_AUTODIFF_HPP
#define CRG_AUTODIFF_HPP

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "crg/tensor.hpp"

namespace crg::ad {

using NodeId = std::size_t;

enum class Op {
  Input,
  Constant,
  Add,
  Sub,
  Mul,
  Scale,
  Offset,
  Reciprocal,
  MatMul,
  Transpose,
  Reshape,
  Conv2d,
  Gather,
  ScatterAdd,
  Relu,
  Sigmoid,
  Silu,
  Tanh,
  Softplus,
  Exp,
  Log,
  GlobalAvgPool,
  Sum,
  Softmax,
  LogSumExp,
};

const char* op_name(Op op);

/// Flat index map used by Gather/ScatterAdd; -1 selects an implicit zero.
using IndexMap = std::shared_ptr<const std::vector<std::ptrdiff_t>>;

struct Node {
  Op op = Op::Constant;
  std::vector<NodeId> inputs;
  Tensor value;
  std::string name;
  double scalar = 0.0;      // Scale factor or Offset amount
  std::size_t padding = 0;  // Conv2d zero padding on each side
  Shape shape_attr;         // Reshape / Gather / ScatterAdd output shape
  IndexMap index;           // Gather / ScatterAdd
};

class Tape;

/// Handle to a node on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, NodeId id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  NodeId id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  NodeId id_ = 0;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Named independent variable. Non-finite values are rejected.
  Var input(const std::string& name, Tensor value);
  Var constant(Tensor value);

  /// Looks up a named input; throws std::out_of_range if absent.
  Var find(const std::string& name) const;

  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(id); }

  /// Recomputes every node from the stored leaf values, in tape order.
  std::vector<Tensor> replay() const;

  /// Appends an operation node; validates shapes and evaluates it.
  Var push(Node node);

 private:
  std::deque<Node> nodes_;  // stable references across push
  std::map<std::string, NodeId> inputs_;
};

// Elementwise arithmetic; operands must share a shape.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var offset(Var a, double amount);
Var reciprocal(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(Var a, double s) { return scale(a, s); }
inline Var operator*(double s, Var a) { return scale(a, s); }
inline Var operator-(Var a) { return scale(a, -1.0); }

// Linear algebra and layout.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var reshape(Var a, Shape shape);
Var gather(Var a, IndexMap index, Shape out_shape);
Var scatter_add(Var a, IndexMap index, Shape out_shape);

/// x: [C, H, W], w: [O, C, k, k] -> [O, H + 2p - k + 1, W + 2p - k + 1], stride 1.
Var conv2d(Var x, Var w, std::size_t padding);

// Nonlinearities. relu'(0) is taken as 0.
Var relu(Var a);
Var sigmoid(Var a);
Var silu(Var a);
Var tanh(Var a);
Var softplus(Var a);
Var exp(Var a);
Var log(Var a);

// Reductions.
Var global_avg_pool(Var a);  // [C, H, W] -> [C]
Var sum(Var a);              // -> scalar
Var softmax(Var a);          // rank-1, max-shifted
Var logsumexp(Var a);        // rank-1 -> scalar, max-shifted
Var log_softmax(Var a);      // a - logsumexp(a)

// Composites.
Var index(Var a, std::size_t i);  // -> scalar
Var dot(Var a, Var b);
Var broadcast(Var scalar, Shape shape);
Var add_channel_bias(Var x, Var bias);  // x: [C, ...], bias: [C]

/// Reverse sweep from a scalar output; the result lives on the tape and can
/// be differentiated again. Returns zeros when output does not depend on wrt.
Var grad(Var output, Var wrt);

Tensor gradient(Var output, Var wrt);

/// Hessian of output w.r.t. wrt applied to v, by double backward.
Tensor hvp(Var output, Var wrt, const Tensor& v);

/// A computation description: builds named outputs from named inputs.
using Graph = std::function<std::map<std::string, Var>(Tape&, const std::map<std::string, Var>&)>;

struct ForwardResult {
  std::unique_ptr<Tape> tape;
  std::map<std::string, Var> inputs;
  std::map<std::string, Var> outputs;

  Tensor output(const std::string& name) const { return outputs.at(name).value(); }
};

ForwardResult forward(const Graph& graph, const std::map<std::string, Tensor>& inputs);

/// Central differences (f(x + h e_j) - f(x - h e_j)) / 2h for every coordinate.
Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x, double h);

}  // namespace crg::ad

#endif  // CRG_AUTODIFF_HPP
