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

// One scalar loss that routes through every differentiable op, for the
// finite-difference suites.
#pragma once

#include <utility>
#include <vector>

#include "genli/nn/ops.hpp"
#include "genli/nn/parameter_store.hpp"
#include "genli/nn/tape.hpp"
#include "genli/random.hpp"

namespace genli::testing {

inline void add_op_suite_parameters(nn::ParameterStore& store, std::uint64_t seed) {
  Rng rng(seed);
  auto random = [&](std::size_t r, std::size_t c) {
    nn::Tensor2D t(r, c);
    for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
    return t;
  };
  store.add("a", random(3, 4));
  store.add("b", random(4, 5));
  store.add("bias", random(1, 5));
  store.add("slope", nn::Tensor2D(1, 1, 0.25));
  store.add("c", random(3, 5));
  store.add("row", random(1, 5));
  store.add("q", random(4, 6));
  store.add("k", random(7, 6));
  store.add("v", random(7, 6));
  store.add("w_mha", random(6, 6));
}

inline nn::Var op_suite_loss(nn::Tape& t, nn::ParameterStore& s) {
  using namespace nn;
  Var a = t.parameter(s, "a");
  Var z = add_bias(t, matmul(t, a, t.parameter(s, "b")), t.parameter(s, "bias"));
  Var act = prelu(t, z, t.parameter(s, "slope"));
  Var gated = mul(t, sigmoid(t, t.parameter(s, "c")), act);
  Var diff = sub(t, add(t, gated, tile_rows(t, t.parameter(s, "row"), 3)), scale(t, z, 0.3));
  std::vector<Var> parts{diff, a};
  Var wide = concat_cols(t, parts);
  Var probs = softmax_rows(t, reshape(t, wide, 9, 3));
  Var picked = weighted_neg_log(t, probs, {{0, 1, 0.5}, {4, 2, 1.5}, {8, 0, 1.0}});
  Var sel = select_rows(t, diff, {2, 0, 2});
  Var pooled = group_mean(t, sel, {{0, 1}, {2, 1}, {1, 1, 1}});
  Var q = t.parameter(s, "q"), k = t.parameter(s, "k"), v = t.parameter(s, "v");
  AttentionLayout layout{{0, 0, 1, 1}, {{0, 3}, {3, 4}, {1, 1, 0, 1, 1, 1, 0}}};
  Var att = attention(t, matmul(t, q, t.parameter(s, "w_mha")), k, v, layout, 2, 3);
  Var logits = select_rows(t, reshape(t, att, 24, 1), {0, 5, 11, 17});
  Var bce = bce_with_logits(t, logits, {1.0, 0.0, 1.0, 0.0});
  std::vector<std::pair<Var, double>> terms{{picked, 1.0}, {sum_all(t, pooled), 0.7}, {bce, 2.0}};
  return weighted_sum(t, terms);
}

}  // namespace genli::testing
