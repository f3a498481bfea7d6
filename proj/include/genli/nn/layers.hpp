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
#include <string>
#include <vector>

#include "genli/nn/ops.hpp"
#include "genli/nn/parameter_store.hpp"
#include "genli/nn/tape.hpp"
#include "genli/random.hpp"

namespace genli::nn {

enum class Activation { kNone, kPrelu, kSigmoid };

inline constexpr double kPreluInitialSlope = 0.25;

// Glorot-uniform weights.
Tensor2D glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

// activation(input * weights + bias). `slope` is only read for kPrelu.
Var dense_forward(Tape& t, Var input, Var weights, Var bias, Activation activation,
                  Var slope = {});

// Fully connected layer; registers "<name>.w", "<name>.b" and, for PReLU,
// a learnable scalar slope "<name>.prelu".
class Dense {
 public:
  Dense(std::string name, std::size_t in_dim, std::size_t out_dim,
        Activation activation);

  void init(ParameterStore& store, Rng& rng) const;
  Var forward(Tape& t, ParameterStore& store, Var input) const;

  const std::string& name() const { return name_; }
  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  Activation activation() const { return activation_; }

 private:
  std::string name_;
  std::size_t in_dim_;
  std::size_t out_dim_;
  Activation activation_;
};

// Stack of Dense layers: dims {in, h1, ..., out}; hidden layers use
// `hidden`, the last layer uses `output`.
class Mlp {
 public:
  Mlp(const std::string& prefix, const std::vector<std::size_t>& dims,
      Activation hidden, Activation output);

  void init(ParameterStore& store, Rng& rng) const;
  Var forward(Tape& t, ParameterStore& store, Var input) const;

  const std::vector<Dense>& layers() const { return layers_; }
  std::size_t in_dim() const { return layers_.front().in_dim(); }
  std::size_t out_dim() const { return layers_.back().out_dim(); }

 private:
  std::vector<Dense> layers_;
};

struct MhaConfig {
  std::size_t heads = 4;
  std::size_t head_dim = 8;
  std::size_t input_dim = 8;
};

void validate(const MhaConfig& cfg);

// Multi-head attention: head i computes
//   softmax((Q Wq_i)(K Wk_i)^T / sqrt(head_dim)) (V Wv_i)
// and the concatenated heads are projected by Wo (heads*head_dim x head_dim).
// The per-head projections are stored side by side as column blocks of
// "<name>.w_q", "<name>.w_k" and "<name>.w_v" (input_dim x heads*head_dim).
class MultiHeadAttention {
 public:
  MultiHeadAttention(std::string name, MhaConfig cfg);

  void init(ParameterStore& store, Rng& rng) const;

  // Output has q.rows rows and head_dim columns.
  Var forward(Tape& t, ParameterStore& store, Var q, Var k, Var v,
              AttentionLayout layout) const;

  const MhaConfig& config() const { return cfg_; }
  const std::string& name() const { return name_; }
  std::string w_q() const { return name_ + ".w_q"; }
  std::string w_k() const { return name_ + ".w_k"; }
  std::string w_v() const { return name_ + ".w_v"; }
  std::string w_o() const { return name_ + ".w_o"; }

 private:
  std::string name_;
  MhaConfig cfg_;
};

// Layout helper: `groups` contiguous key blocks of `per_group` rows, with
// `queries_per_group` consecutive queries attending to each block.
AttentionLayout uniform_layout(std::size_t groups, std::size_t queries_per_group,
                               std::size_t per_group,
                               std::vector<std::uint8_t> valid = {});

}  // namespace genli::nn
