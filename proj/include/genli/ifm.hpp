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
#include <span>
#include <string>
#include <vector>

#include "genli/nn/layers.hpp"
#include "genli/nn/tape.hpp"

namespace genli {

// Gated fusion of the per-kind interest embeddings:
//   z_F = [z_I, z_E, z_R],  g = sigmoid(MLP(z_F)),  x_l = (g * z_F) W_g.
class InterestFusion {
 public:
  InterestFusion(std::string name, std::size_t head_dim, std::size_t kinds = 3);

  void init(nn::ParameterStore& store, Rng& rng) const;

  struct Output {
    nn::Var x_l;
    nn::Var gate;
  };
  // parts: one (batch x d_h) block per kind.
  Output fuse(nn::Tape& t, nn::ParameterStore& store, std::span<const nn::Var> parts) const;

  const nn::Mlp& gate_mlp() const { return gate_; }
  std::string projection_name() const { return name_ + ".w_g"; }
  std::size_t width() const { return head_dim_ * kinds_; }

 private:
  std::string name_;
  std::size_t head_dim_;
  std::size_t kinds_;
  nn::Mlp gate_;
};

// MLP_ctr over x = [x_l, x_s, x_o, e_t]; emits the logit (sigmoid gives the CTR).
class CtrHead {
 public:
  CtrHead(std::string name, std::size_t input_dim, std::vector<std::size_t> hidden = {200, 80});

  void init(nn::ParameterStore& store, Rng& rng) const;
  // parts are concatenated column-wise; empty blocks are skipped.
  nn::Var logits(nn::Tape& t, nn::ParameterStore& store, std::span<const nn::Var> parts) const;

  const nn::Mlp& mlp() const { return mlp_; }
  std::size_t input_dim() const { return mlp_.in_dim(); }

 private:
  nn::Mlp mlp_;
};

double predict_probability(double logit);

}  // namespace genli
