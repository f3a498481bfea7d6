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

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "genli/nn/parameter_store.hpp"
#include "genli/nn/tensor.hpp"

namespace genli::nn {

class Tape;

// Handle to a node on a Tape.
class Var {
 public:
  Var() = default;
  std::size_t index() const { return index_; }
  bool valid() const { return index_ != kInvalid; }

 private:
  friend class Tape;
  explicit Var(std::size_t index) : index_(index) {}
  static constexpr std::size_t kInvalid = std::numeric_limits<std::size_t>::max();
  std::size_t index_ = kInvalid;
};

// Reverse-mode tape. Every op records its output value together with a
// closure that pushes the output gradient into its inputs. A tape is built
// for one batch, consumed by a single backward() call and then discarded.
//
// Parameter leaves alias the store: their values are read in place and their
// gradients accumulate straight into Parameter::grad.
class Tape {
 public:
  // Receives the value and gradient of the node being processed.
  using BackwardFn =
      std::function<void(Tape&, const Tensor2D& out_value, const Tensor2D& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor2D value, std::string_view label = "constant");
  // Same Var for repeated calls with the same parameter.
  Var parameter(Parameter& p);
  Var parameter(ParameterStore& store, std::string_view name) {
    return parameter(store.at(name));
  }

  // Records an op output. `backward` may be empty when no input needs a
  // gradient; it is only invoked when the output received a gradient.
  Var record(std::string_view op, Tensor2D value,
             std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(std::string_view op, Tensor2D value, const std::vector<Var>& inputs,
             BackwardFn backward);

  const Tensor2D& value(Var v) const;
  bool requires_grad(Var v) const;
  // Gradient slot of `v`, zero-allocated on first access.
  Tensor2D& grad(Var v);
  // True when some consumer already pushed a gradient into `v`.
  bool has_grad(Var v) const;

  // Seeds d(loss)/d(loss) = 1 and walks the tape backwards. `loss` must be a
  // 1x1 node. Throws StateError on an empty tape, a foreign or non-scalar
  // node, or a second call.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  // Op label of the first node whose value is non-finite, or empty.
  std::string first_non_finite() const;

 private:
  struct Node {
    std::string op;
    Tensor2D value;
    Tensor2D grad;
    Parameter* param = nullptr;
    bool requires_grad = false;
    bool grad_allocated = false;
    BackwardFn backward;
  };
  Node& node(Var v);
  const Node& node(Var v) const;
  Var push(Node n);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  bool consumed_ = false;
};

}  // namespace genli::nn
