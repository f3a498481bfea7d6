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
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "genli/nn/tape.hpp"

namespace genli::nn {

// Differentiable ops. Each records its output on the tape along with the
// analytic backward rule. Shape errors raise ConfigError.

Var matmul(Tape& t, Var a, Var b);
// x + bias, bias is 1 x cols and broadcast over rows.
Var add_bias(Tape& t, Var x, Var bias);
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var scale(Tape& t, Var x, double factor);
Var mul(Tape& t, Var a, Var b);
// max(x, 0) + slope * min(x, 0); slope is a 1x1 node.
Var prelu(Tape& t, Var x, Var slope);
Var sigmoid(Tape& t, Var x);
// Row-wise softmax with max subtraction.
Var softmax_rows(Tape& t, Var x);
Var concat_cols(Tape& t, std::span<const Var> parts);
Var reshape(Tape& t, Var x, std::size_t rows, std::size_t cols);
// out.row(i) = x.row(rows[i]); gradients scatter-add back.
Var select_rows(Tape& t, Var x, std::vector<std::size_t> rows);
// Repeats a 1 x c row n times.
Var tile_rows(Tape& t, Var x, std::size_t n);
Var sum_all(Tape& t, Var x);
// sum_i weight_i * x_i over 1x1 nodes.
Var weighted_sum(Tape& t, std::span<const std::pair<Var, double>> terms);

// Contiguous row groups with an optional per-row validity mask.
struct RowGroups {
  std::vector<std::size_t> begin;
  std::vector<std::size_t> count;
  // One flag per row of the grouped matrix; empty means every row is valid.
  std::vector<std::uint8_t> valid;
};

// Mean of the valid rows of every group; one output row per group.
Var group_mean(Tape& t, Var x, RowGroups groups);

// Query row i attends over key group query_group[i] of `keys`.
struct AttentionLayout {
  std::vector<std::size_t> query_group;
  RowGroups keys;
};

// Scaled dot-product attention on already projected inputs. q is
// (queries x heads*head_dim), k and v are (keys x heads*head_dim); head h
// uses columns [h*head_dim, (h+1)*head_dim). Masked keys get zero weight.
// A query whose key group has no valid row raises DataError.
Var attention(Tape& t, Var q, Var k, Var v, AttentionLayout layout,
              std::size_t heads, std::size_t head_dim);

struct Pick {
  std::size_t row;
  std::size_t col;
  double weight;
};

// sum_p weight_p * -log(max(probs(row_p, col_p), floor)).
Var weighted_neg_log(Tape& t, Var probs, std::vector<Pick> picks,
                     double floor = 1e-12);

// Mean binary cross-entropy of sigmoid(logits) against labels, computed in
// the numerically stable logit form. logits is (n x 1).
Var bce_with_logits(Tape& t, Var logits, std::vector<double> labels);

// Forward-only helpers shared with non-tape code paths.
void softmax_inplace(std::span<double> row);
double stable_sigmoid(double x);

}  // namespace genli::nn
