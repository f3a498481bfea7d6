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

#include "genli/nn/layers.hpp"

#include <cmath>

#include "genli/errors.hpp"

namespace genli::nn {

Tensor2D glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor2D w(fan_in, fan_out);
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
  return w;
}

Var dense_forward(Tape& t, Var input, Var weights, Var bias, Activation activation,
                  Var slope) {
  if (t.value(input).cols() != t.value(weights).rows()) {
    throw ConfigError("dense: input " + t.value(input).shape_string() +
                      " does not match weights " + t.value(weights).shape_string());
  }
  Var z = add_bias(t, matmul(t, input, weights), bias);
  switch (activation) {
    case Activation::kNone:
      return z;
    case Activation::kPrelu:
      if (!slope.valid()) throw ConfigError("dense: PReLU layer without a slope");
      return prelu(t, z, slope);
    case Activation::kSigmoid:
      return sigmoid(t, z);
  }
  return z;
}

Dense::Dense(std::string name, std::size_t in_dim, std::size_t out_dim,
             Activation activation)
    : name_(std::move(name)), in_dim_(in_dim), out_dim_(out_dim), activation_(activation) {
  if (in_dim_ == 0 || out_dim_ == 0) {
    throw ConfigError("dense layer '" + name_ + "' needs non-zero dimensions");
  }
}

void Dense::init(ParameterStore& store, Rng& rng) const {
  store.add(name_ + ".w", glorot_uniform(in_dim_, out_dim_, rng));
  store.add(name_ + ".b", Tensor2D(1, out_dim_));
  if (activation_ == Activation::kPrelu) {
    store.add(name_ + ".prelu", Tensor2D(1, 1, kPreluInitialSlope));
  }
}

Var Dense::forward(Tape& t, ParameterStore& store, Var input) const {
  Var slope;
  if (activation_ == Activation::kPrelu) slope = t.parameter(store, name_ + ".prelu");
  return dense_forward(t, input, t.parameter(store, name_ + ".w"),
                       t.parameter(store, name_ + ".b"), activation_, slope);
}

Mlp::Mlp(const std::string& prefix, const std::vector<std::size_t>& dims,
         Activation hidden, Activation output) {
  if (dims.size() < 2) throw ConfigError("mlp '" + prefix + "' needs at least two dims");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool last = i + 2 == dims.size();
    layers_.emplace_back(prefix + "." + std::to_string(i), dims[i], dims[i + 1],
                         last ? output : hidden);
  }
}

void Mlp::init(ParameterStore& store, Rng& rng) const {
  for (const Dense& d : layers_) d.init(store, rng);
}

Var Mlp::forward(Tape& t, ParameterStore& store, Var input) const {
  Var x = input;
  for (const Dense& d : layers_) x = d.forward(t, store, x);
  return x;
}

void validate(const MhaConfig& cfg) {
  if (cfg.heads < 1) throw ConfigError("attention needs at least one head");
  if (cfg.head_dim < 1) throw ConfigError("attention head_dim must be >= 1");
  if (cfg.input_dim < 1) throw ConfigError("attention input_dim must be >= 1");
}

MultiHeadAttention::MultiHeadAttention(std::string name, MhaConfig cfg)
    : name_(std::move(name)), cfg_(cfg) {
  validate(cfg_);
}

void MultiHeadAttention::init(ParameterStore& store, Rng& rng) const {
  const std::size_t width = cfg_.heads * cfg_.head_dim;
  store.add(w_q(), glorot_uniform(cfg_.input_dim, width, rng));
  store.add(w_k(), glorot_uniform(cfg_.input_dim, width, rng));
  store.add(w_v(), glorot_uniform(cfg_.input_dim, width, rng));
  store.add(w_o(), glorot_uniform(width, cfg_.head_dim, rng));
}

Var MultiHeadAttention::forward(Tape& t, ParameterStore& store, Var q, Var k, Var v,
                                AttentionLayout layout) const {
  const auto check = [&](Var x, const char* what) {
    if (t.value(x).cols() != cfg_.input_dim) {
      throw ConfigError("mha '" + name_ + "': " + what + " has " +
                        std::to_string(t.value(x).cols()) + " columns, expected " +
                        std::to_string(cfg_.input_dim));
    }
  };
  check(q, "Q");
  check(k, "K");
  check(v, "V");
  if (t.value(k).rows() != t.value(v).rows()) {
    throw ConfigError("mha '" + name_ + "': K and V row counts differ");
  }
  Var qp = matmul(t, q, t.parameter(store, w_q()));
  Var kp = matmul(t, k, t.parameter(store, w_k()));
  Var vp = matmul(t, v, t.parameter(store, w_v()));
  Var heads = attention(t, qp, kp, vp, std::move(layout), cfg_.heads, cfg_.head_dim);
  return matmul(t, heads, t.parameter(store, w_o()));
}

AttentionLayout uniform_layout(std::size_t groups, std::size_t queries_per_group,
                               std::size_t per_group, std::vector<std::uint8_t> valid) {
  AttentionLayout layout;
  layout.query_group.reserve(groups * queries_per_group);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t q = 0; q < queries_per_group; ++q) layout.query_group.push_back(g);
    layout.keys.begin.push_back(g * per_group);
    layout.keys.count.push_back(per_group);
  }
  layout.keys.valid = std::move(valid);
  return layout;
}

}  // namespace genli::nn
