// Copyright 2026 The GenLI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "genli/nn/tape.hpp"

#include "genli/errors.hpp"

namespace genli::nn {

Var Tape::push(Node n) {
  if (consumed_) throw StateError("tape already ran backward; build a new one");
  nodes_.push_back(std::move(n));
  return Var(nodes_.size() - 1);
}

Tape::Node& Tape::node(Var v) {
  if (!v.valid() || v.index() >= nodes_.size()) {
    throw StateError("Var does not belong to this tape");
  }
  return nodes_[v.index()];
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.index() >= nodes_.size()) {
    throw StateError("Var does not belong to this tape");
  }
  return nodes_[v.index()];
}

Var Tape::constant(Tensor2D value, std::string_view label) {
  Node n;
  n.op = label;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return Var(it->second);
  }
  Node n;
  n.op = p.name;
  n.param = &p;
  n.requires_grad = true;
  n.grad_allocated = true;
  Var v = push(std::move(n));
  param_nodes_[&p] = v.index();
  return v;
}

Var Tape::record(std::string_view op, Tensor2D value,
                 std::initializer_list<Var> inputs, BackwardFn backward) {
  return record(op, std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Var Tape::record(std::string_view op, Tensor2D value,
                 const std::vector<Var>& inputs, BackwardFn backward) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  for (Var in : inputs) n.requires_grad |= node(in).requires_grad;
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

const Tensor2D& Tape::value(Var v) const {
  const Node& n = node(v);
  return n.param ? n.param->value : n.value;
}

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

bool Tape::has_grad(Var v) const { return node(v).grad_allocated; }

Tensor2D& Tape::grad(Var v) {
  Node& n = node(v);
  if (n.param) return n.param->grad;
  if (!n.grad_allocated) {
    n.grad = Tensor2D(n.value.rows(), n.value.cols());
    n.grad_allocated = true;
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  if (nodes_.empty()) throw StateError("backward() called before any forward pass");
  if (consumed_) throw StateError("backward() already ran on this tape");
  const Node& l = node(loss);
  if (l.value.rows() != 1 || l.value.cols() != 1) {
    throw StateError("backward() needs a 1x1 loss, got " + l.value.shape_string());
  }
  consumed_ = true;
  if (!l.requires_grad) return;
  grad(loss)(0, 0) = 1.0;
  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.param || !n.grad_allocated || !n.backward) continue;
    n.backward(*this, n.value, n.grad);
  }
}

std::string Tape::first_non_finite() const {
  for (const Node& n : nodes_) {
    const Tensor2D& v = n.param ? n.param->value : n.value;
    if (!v.all_finite()) return n.op;
  }
  return {};
}

}  // namespace genli::nn
