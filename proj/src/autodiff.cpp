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

#include "crg/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

namespace crg::ad {

namespace {

[[noreturn]] void shape_fail(const Node& n, const std::string& what) {
  throw ShapeError(std::string(op_name(n.op)) + " at node '" + n.name + "': " + what);
}

void require_same(const Node& n, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    shape_fail(n, "shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

template <typename F>
Tensor map_unary(const Tensor& a, F f) {
  Eigen::VectorXd out = a.data().unaryExpr(f);
  return Tensor(a.shape(), std::move(out));
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor conv2d_forward(const Node& n, const Tensor& x, const Tensor& w) {
  if (x.rank() != 3 || w.rank() != 4) {
    shape_fail(n, "expects x [C,H,W] and w [O,C,k,k], got " + to_string(x.shape()) + " and " +
                      to_string(w.shape()));
  }
  const std::size_t channels = x.shape()[0], height = x.shape()[1], width = x.shape()[2];
  const std::size_t outs = w.shape()[0], k = w.shape()[2];
  if (w.shape()[1] != channels || w.shape()[3] != k) {
    shape_fail(n, "kernel " + to_string(w.shape()) + " incompatible with input " + to_string(x.shape()));
  }
  const std::size_t pad = n.padding;
  if (height + 2 * pad < k || width + 2 * pad < k) {
    shape_fail(n, "kernel larger than padded input");
  }
  const std::size_t out_h = height + 2 * pad - k + 1, out_w = width + 2 * pad - k + 1;
  Tensor y({outs, out_h, out_w});
  for (std::size_t o = 0; o < outs; ++o) {
    for (std::size_t i = 0; i < out_h; ++i) {
      for (std::size_t j = 0; j < out_w; ++j) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
          for (std::size_t a = 0; a < k; ++a) {
            const auto row = static_cast<std::ptrdiff_t>(i + a) - static_cast<std::ptrdiff_t>(pad);
            if (row < 0 || row >= static_cast<std::ptrdiff_t>(height)) continue;
            for (std::size_t b = 0; b < k; ++b) {
              const auto col = static_cast<std::ptrdiff_t>(j + b) - static_cast<std::ptrdiff_t>(pad);
              if (col < 0 || col >= static_cast<std::ptrdiff_t>(width)) continue;
              acc += x[(c * height + static_cast<std::size_t>(row)) * width + static_cast<std::size_t>(col)] *
                     w[((o * channels + c) * k + a) * k + b];
            }
          }
        }
        y[(o * out_h + i) * out_w + j] = acc;
      }
    }
  }
  return y;
}

Tensor evaluate(const Node& n, const std::vector<const Tensor*>& in) {
  switch (n.op) {
    case Op::Input:
    case Op::Constant:
      return n.value;
    case Op::Add:
      require_same(n, *in[0], *in[1]);
      return Tensor(in[0]->shape(), in[0]->data() + in[1]->data());
    case Op::Sub:
      require_same(n, *in[0], *in[1]);
      return Tensor(in[0]->shape(), in[0]->data() - in[1]->data());
    case Op::Mul:
      require_same(n, *in[0], *in[1]);
      return Tensor(in[0]->shape(), in[0]->data().cwiseProduct(in[1]->data()));
    case Op::Scale:
      return Tensor(in[0]->shape(), in[0]->data() * n.scalar);
    case Op::Offset:
      return Tensor(in[0]->shape(), in[0]->data().array() + n.scalar);
    case Op::Reciprocal:
      return map_unary(*in[0], [](double v) { return 1.0 / v; });
    case Op::MatMul: {
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
        shape_fail(n, "cannot multiply " + to_string(a.shape()) + " by " + to_string(b.shape()));
      }
      const std::size_t m = a.shape()[0], k = a.shape()[1], cols = b.shape()[1];
      Tensor y({m, cols});
      y.matrix(m, cols).noalias() = a.matrix(m, k) * b.matrix(k, cols);
      return y;
    }
    case Op::Transpose: {
      const Tensor& a = *in[0];
      if (a.rank() != 2) shape_fail(n, "expects rank 2, got " + to_string(a.shape()));
      const std::size_t r = a.shape()[0], c = a.shape()[1];
      Tensor y({c, r});
      y.matrix(c, r) = a.matrix(r, c).transpose();
      return y;
    }
    case Op::Reshape:
      if (numel(n.shape_attr) != in[0]->size()) {
        shape_fail(n, "cannot reshape " + to_string(in[0]->shape()) + " to " + to_string(n.shape_attr));
      }
      return Tensor(n.shape_attr, in[0]->data());
    case Op::Conv2d:
      return conv2d_forward(n, *in[0], *in[1]);
    case Op::Gather: {
      const auto& idx = *n.index;
      const Tensor& a = *in[0];
      if (idx.size() != numel(n.shape_attr)) shape_fail(n, "index map size differs from output shape");
      Tensor y(n.shape_attr);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] < 0) continue;
        if (static_cast<std::size_t>(idx[k]) >= a.size()) shape_fail(n, "index out of range");
        y[k] = a[static_cast<std::size_t>(idx[k])];
      }
      return y;
    }
    case Op::ScatterAdd: {
      const auto& idx = *n.index;
      const Tensor& a = *in[0];
      if (idx.size() != a.size()) shape_fail(n, "index map size differs from input " + to_string(a.shape()));
      Tensor y(n.shape_attr);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] < 0) continue;
        if (static_cast<std::size_t>(idx[k]) >= y.size()) shape_fail(n, "index out of range");
        y[static_cast<std::size_t>(idx[k])] += a[k];
      }
      return y;
    }
    case Op::Relu:
      return map_unary(*in[0], [](double v) { return v > 0.0 ? v : 0.0; });
    case Op::Sigmoid:
      return map_unary(*in[0], stable_sigmoid);
    case Op::Silu:
      return map_unary(*in[0], [](double v) { return v * stable_sigmoid(v); });
    case Op::Tanh:
      return map_unary(*in[0], [](double v) { return std::tanh(v); });
    case Op::Softplus:
      return map_unary(*in[0], [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); });
    case Op::Exp:
      return map_unary(*in[0], [](double v) { return std::exp(v); });
    case Op::Log:
      return map_unary(*in[0], [](double v) { return std::log(v); });
    case Op::GlobalAvgPool: {
      const Tensor& a = *in[0];
      if (a.rank() != 3) shape_fail(n, "expects [C,H,W], got " + to_string(a.shape()));
      const std::size_t c = a.shape()[0], hw = a.shape()[1] * a.shape()[2];
      if (hw == 0) shape_fail(n, "empty spatial extent");
      Tensor y({c});
      y.data() = a.matrix(c, hw).rowwise().sum() / static_cast<double>(hw);
      return y;
    }
    case Op::Sum:
      return Tensor::scalar(in[0]->data().sum());
    case Op::Softmax: {
      const Tensor& a = *in[0];
      if (a.rank() != 1 || a.size() == 0) shape_fail(n, "expects a non-empty vector, got " + to_string(a.shape()));
      Eigen::VectorXd e = (a.data().array() - a.data().maxCoeff()).exp();
      return Tensor(a.shape(), e / e.sum());
    }
    case Op::LogSumExp: {
      const Tensor& a = *in[0];
      if (a.rank() != 1 || a.size() == 0) shape_fail(n, "expects a non-empty vector, got " + to_string(a.shape()));
      const double m = a.data().maxCoeff();
      return Tensor::scalar(m + std::log((a.data().array() - m).exp().sum()));
    }
  }
  throw std::logic_error("unhandled op");
}

Var unary(Op op, Var a) {
  Node n;
  n.op = op;
  n.inputs = {a.id()};
  return a.tape().push(std::move(n));
}

Var binary(Op op, Var a, Var b) {
  if (&a.tape() != &b.tape()) throw std::invalid_argument(std::string(op_name(op)) + ": operands on different tapes");
  Node n;
  n.op = op;
  n.inputs = {a.id(), b.id()};
  return a.tape().push(std::move(n));
}

IndexMap make_index(std::vector<std::ptrdiff_t> idx) {
  return std::make_shared<const std::vector<std::ptrdiff_t>>(std::move(idx));
}

/// Patch-extraction map for conv2d: [C*k*k, out_h*out_w] gathers from x.
IndexMap im2col_index(const Shape& x, std::size_t k, std::size_t pad, std::size_t out_h, std::size_t out_w) {
  const std::size_t channels = x[0], height = x[1], width = x[2];
  std::vector<std::ptrdiff_t> idx(channels * k * k * out_h * out_w, -1);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        const std::size_t r = (c * k + a) * k + b;
        for (std::size_t i = 0; i < out_h; ++i) {
          for (std::size_t j = 0; j < out_w; ++j) {
            const auto row = static_cast<std::ptrdiff_t>(i + a) - static_cast<std::ptrdiff_t>(pad);
            const auto col = static_cast<std::ptrdiff_t>(j + b) - static_cast<std::ptrdiff_t>(pad);
            if (row < 0 || col < 0 || row >= static_cast<std::ptrdiff_t>(height) ||
                col >= static_cast<std::ptrdiff_t>(width)) {
              continue;
            }
            idx[r * out_h * out_w + i * out_w + j] =
                static_cast<std::ptrdiff_t>((c * height + static_cast<std::size_t>(row)) * width) + col;
          }
        }
      }
    }
  }
  return make_index(std::move(idx));
}

Var ones_minus(Var a) { return offset(scale(a, -1.0), 1.0); }

/// Vector-Jacobian products, expressed as tape operations so they can be
/// differentiated again. Returns one contribution per input (invalid Var
/// where the input does not need one).
std::vector<Var> vjp(Tape& tape, NodeId id, Var g, const std::vector<char>& needs) {
  const Node node = tape.node(id);  // copy: pushes below may reallocate
  const Var y(&tape, id);
  std::vector<Var> in;
  for (NodeId p : node.inputs) in.emplace_back(&tape, p);
  std::vector<Var> out(in.size());
  auto need = [&](std::size_t k) { return needs[node.inputs[k]] != 0; };

  switch (node.op) {
    case Op::Input:
    case Op::Constant:
      break;
    case Op::Add:
      if (need(0)) out[0] = g;
      if (need(1)) out[1] = g;
      break;
    case Op::Sub:
      if (need(0)) out[0] = g;
      if (need(1)) out[1] = scale(g, -1.0);
      break;
    case Op::Mul:
      if (need(0)) out[0] = mul(g, in[1]);
      if (need(1)) out[1] = mul(g, in[0]);
      break;
    case Op::Scale:
      out[0] = scale(g, node.scalar);
      break;
    case Op::Offset:
      out[0] = g;
      break;
    case Op::Reciprocal:
      out[0] = scale(mul(g, mul(y, y)), -1.0);
      break;
    case Op::MatMul:
      if (need(0)) out[0] = matmul(g, transpose(in[1]));
      if (need(1)) out[1] = matmul(transpose(in[0]), g);
      break;
    case Op::Transpose:
      out[0] = transpose(g);
      break;
    case Op::Reshape:
      out[0] = reshape(g, in[0].shape());
      break;
    case Op::Conv2d: {
      const Shape xs = in[0].shape();
      const Shape ws = in[1].shape();
      const Shape ys = y.shape();
      const std::size_t outs = ws[0], k = ws[2], ckk = ws[1] * k * k, hw = ys[1] * ys[2];
      const Var g2 = reshape(g, {outs, hw});
      const IndexMap idx = im2col_index(xs, k, node.padding, ys[1], ys[2]);
      if (need(0)) {
        const Var w2 = reshape(in[1], {outs, ckk});
        out[0] = scatter_add(matmul(transpose(w2), g2), idx, xs);
      }
      if (need(1)) {
        const Var cols = gather(in[0], idx, {ckk, hw});
        out[1] = reshape(matmul(g2, transpose(cols)), ws);
      }
      break;
    }
    case Op::Gather:
      out[0] = scatter_add(g, node.index, in[0].shape());
      break;
    case Op::ScatterAdd:
      out[0] = gather(g, node.index, in[0].shape());
      break;
    case Op::Relu: {
      Eigen::VectorXd mask = in[0].value().data().unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
      out[0] = mul(g, tape.constant(Tensor(in[0].shape(), std::move(mask))));
      break;
    }
    case Op::Sigmoid:
      out[0] = mul(g, mul(y, ones_minus(y)));
      break;
    case Op::Silu: {
      const Var s = sigmoid(in[0]);
      out[0] = mul(g, add(s, mul(in[0], mul(s, ones_minus(s)))));
      break;
    }
    case Op::Tanh:
      out[0] = mul(g, ones_minus(mul(y, y)));
      break;
    case Op::Softplus:
      out[0] = mul(g, sigmoid(in[0]));
      break;
    case Op::Exp:
      out[0] = mul(g, y);
      break;
    case Op::Log:
      out[0] = mul(g, reciprocal(in[0]));
      break;
    case Op::GlobalAvgPool: {
      const Shape xs = in[0].shape();
      const std::size_t hw = xs[1] * xs[2];
      std::vector<std::ptrdiff_t> idx(numel(xs));
      for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<std::ptrdiff_t>(k / hw);
      out[0] = scale(gather(g, make_index(std::move(idx)), xs), 1.0 / static_cast<double>(hw));
      break;
    }
    case Op::Sum:
      out[0] = broadcast(g, in[0].shape());
      break;
    case Op::Softmax:
      out[0] = mul(y, sub(g, broadcast(sum(mul(g, y)), y.shape())));
      break;
    case Op::LogSumExp:
      out[0] = mul(broadcast(g, in[0].shape()), softmax(in[0]));
      break;
  }
  return out;
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::Input: return "input";
    case Op::Constant: return "constant";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Scale: return "scale";
    case Op::Offset: return "offset";
    case Op::Reciprocal: return "reciprocal";
    case Op::MatMul: return "matmul";
    case Op::Transpose: return "transpose";
    case Op::Reshape: return "reshape";
    case Op::Conv2d: return "conv2d";
    case Op::Gather: return "gather";
    case Op::ScatterAdd: return "scatter_add";
    case Op::Relu: return "relu";
    case Op::Sigmoid: return "sigmoid";
    case Op::Silu: return "silu";
    case Op::Tanh: return "tanh";
    case Op::Softplus: return "softplus";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::GlobalAvgPool: return "global_avg_pool";
    case Op::Sum: return "sum";
    case Op::Softmax: return "softmax";
    case Op::LogSumExp: return "logsumexp";
  }
  return "unknown";
}

const Tensor& Var::value() const { return tape_->node(id_).value; }

Var Tape::input(const std::string& name, Tensor value) {
  if (!value.all_finite()) throw NonFiniteError("input '" + name + "' contains non-finite values");
  if (inputs_.count(name)) throw std::invalid_argument("input '" + name + "' already defined");
  Node n;
  n.op = Op::Input;
  n.name = name;
  n.value = std::move(value);
  Var v = push(std::move(n));
  inputs_[name] = v.id();
  return v;
}

Var Tape::constant(Tensor value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::find(const std::string& name) const {
  const auto it = inputs_.find(name);
  if (it == inputs_.end()) throw std::out_of_range("no input named '" + name + "' on tape");
  return {const_cast<Tape*>(this), it->second};
}

Var Tape::push(Node node) {
  const NodeId id = nodes_.size();
  if (node.name.empty()) node.name = std::string(op_name(node.op)) + "#" + std::to_string(id);
  for (NodeId p : node.inputs) {
    if (p >= id) throw std::logic_error("node '" + node.name + "' references a later node");
  }
  if (node.op != Op::Input && node.op != Op::Constant) {
    std::vector<const Tensor*> in;
    in.reserve(node.inputs.size());
    for (NodeId p : node.inputs) in.push_back(&nodes_[p].value);
    node.value = evaluate(node, in);
  }
  nodes_.push_back(std::move(node));
  return {this, id};
}

std::vector<Tensor> Tape::replay() const {
  std::vector<Tensor> values;
  values.reserve(nodes_.size());
  for (const Node& n : nodes_) {
    std::vector<const Tensor*> in;
    for (NodeId p : n.inputs) in.push_back(&values[p]);
    values.push_back(evaluate(n, in));
  }
  return values;
}

Var add(Var a, Var b) { return binary(Op::Add, a, b); }
Var sub(Var a, Var b) { return binary(Op::Sub, a, b); }
Var mul(Var a, Var b) { return binary(Op::Mul, a, b); }

Var scale(Var a, double factor) {
  Node n;
  n.op = Op::Scale;
  n.inputs = {a.id()};
  n.scalar = factor;
  return a.tape().push(std::move(n));
}

Var offset(Var a, double amount) {
  Node n;
  n.op = Op::Offset;
  n.inputs = {a.id()};
  n.scalar = amount;
  return a.tape().push(std::move(n));
}

Var reciprocal(Var a) { return unary(Op::Reciprocal, a); }
Var matmul(Var a, Var b) { return binary(Op::MatMul, a, b); }
Var transpose(Var a) { return unary(Op::Transpose, a); }

Var reshape(Var a, Shape shape) {
  Node n;
  n.op = Op::Reshape;
  n.inputs = {a.id()};
  n.shape_attr = std::move(shape);
  return a.tape().push(std::move(n));
}

Var gather(Var a, IndexMap index, Shape out_shape) {
  Node n;
  n.op = Op::Gather;
  n.inputs = {a.id()};
  n.index = std::move(index);
  n.shape_attr = std::move(out_shape);
  return a.tape().push(std::move(n));
}

Var scatter_add(Var a, IndexMap index, Shape out_shape) {
  Node n;
  n.op = Op::ScatterAdd;
  n.inputs = {a.id()};
  n.index = std::move(index);
  n.shape_attr = std::move(out_shape);
  return a.tape().push(std::move(n));
}

Var conv2d(Var x, Var w, std::size_t padding) {
  if (&x.tape() != &w.tape()) throw std::invalid_argument("conv2d: operands on different tapes");
  Node n;
  n.op = Op::Conv2d;
  n.inputs = {x.id(), w.id()};
  n.padding = padding;
  return x.tape().push(std::move(n));
}

Var relu(Var a) { return unary(Op::Relu, a); }
Var sigmoid(Var a) { return unary(Op::Sigmoid, a); }
Var silu(Var a) { return unary(Op::Silu, a); }
Var tanh(Var a) { return unary(Op::Tanh, a); }
Var softplus(Var a) { return unary(Op::Softplus, a); }
Var exp(Var a) { return unary(Op::Exp, a); }
Var log(Var a) { return unary(Op::Log, a); }
Var global_avg_pool(Var a) { return unary(Op::GlobalAvgPool, a); }
Var sum(Var a) { return unary(Op::Sum, a); }
Var softmax(Var a) { return unary(Op::Softmax, a); }
Var logsumexp(Var a) { return unary(Op::LogSumExp, a); }

Var log_softmax(Var a) { return sub(a, broadcast(logsumexp(a), a.shape())); }

Var index(Var a, std::size_t i) {
  if (i >= a.value().size()) {
    throw ShapeError("index " + std::to_string(i) + " out of range for shape " + to_string(a.shape()));
  }
  return gather(a, make_index({static_cast<std::ptrdiff_t>(i)}), {});
}

Var dot(Var a, Var b) { return sum(mul(a, b)); }

Var broadcast(Var scalar, Shape shape) {
  if (scalar.value().size() != 1) throw ShapeError("broadcast: source must have one element");
  std::vector<std::ptrdiff_t> idx(numel(shape), 0);
  return gather(scalar, make_index(std::move(idx)), std::move(shape));
}

Var add_channel_bias(Var x, Var bias) {
  const Shape& xs = x.shape();
  if (xs.empty() || bias.shape() != Shape{xs[0]}) {
    throw ShapeError("add_channel_bias: bias " + to_string(bias.shape()) + " incompatible with " + to_string(xs));
  }
  const std::size_t inner = numel(xs) / xs[0];
  std::vector<std::ptrdiff_t> idx(numel(xs));
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<std::ptrdiff_t>(k / inner);
  return add(x, gather(bias, make_index(std::move(idx)), xs));
}

Var grad(Var output, Var wrt) {
  if (&output.tape() != &wrt.tape()) throw std::invalid_argument("grad: output and wrt on different tapes");
  if (output.value().size() != 1) {
    throw ShapeError("grad: output '" + output.tape().node(output.id()).name + "' is not scalar (shape " +
                     to_string(output.shape()) + ")");
  }
  Tape& tape = output.tape();
  const NodeId top = output.id();
  const NodeId base = wrt.id();
  if (base > top) return tape.constant(Tensor(wrt.shape()));

  // needs[i]: node i lies on a path from wrt.
  std::vector<char> needs(top + 1, 0);
  needs[base] = 1;
  for (NodeId i = base + 1; i <= top; ++i) {
    for (NodeId p : tape.node(i).inputs) {
      if (needs[p]) {
        needs[i] = 1;
        break;
      }
    }
  }
  if (!needs[top]) return tape.constant(Tensor(wrt.shape()));

  std::vector<std::optional<Var>> adjoint(top + 1);
  adjoint[top] = tape.constant(Tensor::filled(output.shape(), 1.0));
  for (NodeId i = top; i > base; --i) {
    if (!needs[i] || !adjoint[i]) continue;
    const std::vector<Var> contrib = vjp(tape, i, *adjoint[i], needs);
    const std::vector<NodeId> parents = tape.node(i).inputs;
    for (std::size_t k = 0; k < parents.size(); ++k) {
      if (!contrib[k].valid() || !needs[parents[k]]) continue;
      auto& slot = adjoint[parents[k]];
      slot = slot ? add(*slot, contrib[k]) : contrib[k];
    }
  }
  return adjoint[base] ? *adjoint[base] : tape.constant(Tensor(wrt.shape()));
}

Tensor gradient(Var output, Var wrt) { return grad(output, wrt).value(); }

Tensor hvp(Var output, Var wrt, const Tensor& v) {
  if (v.shape() != wrt.shape()) {
    throw ShapeError("hvp: direction shape " + to_string(v.shape()) + " differs from " + to_string(wrt.shape()));
  }
  const Var g = grad(output, wrt);
  const Var gv = dot(g, output.tape().constant(v));
  return gradient(gv, wrt);
}

ForwardResult forward(const Graph& graph, const std::map<std::string, Tensor>& inputs) {
  ForwardResult result;
  result.tape = std::make_unique<Tape>();
  for (const auto& [name, value] : inputs) result.inputs[name] = result.tape->input(name, value);
  result.outputs = graph(*result.tape, result.inputs);
  return result;
}

Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: step must be positive");
  Tensor g(x.shape());
  Tensor probe = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const double up = f(probe);
    probe[j] = x[j] - h;
    const double down = f(probe);
    probe[j] = x[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace crg::ad
