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

#include "genli/ifm.hpp"

#include "genli/errors.hpp"
#include "genli/nn/ops.hpp"

namespace genli {

namespace {

std::vector<std::size_t> ctr_dims(std::size_t input_dim, const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  return dims;
}

}  // namespace

InterestFusion::InterestFusion(std::string name, std::size_t head_dim, std::size_t kinds)
    : name_(std::move(name)),
      head_dim_(head_dim),
      kinds_(kinds),
      gate_(name_ + ".gate", {head_dim * kinds, head_dim * kinds, head_dim * kinds},
            nn::Activation::kPrelu, nn::Activation::kSigmoid) {}

void InterestFusion::init(nn::ParameterStore& store, Rng& rng) const {
  gate_.init(store, rng);
  store.add(projection_name(), nn::glorot_uniform(width(), head_dim_, rng));
}

InterestFusion::Output InterestFusion::fuse(nn::Tape& t, nn::ParameterStore& store,
                                            std::span<const nn::Var> parts) const {
  if (parts.size() != kinds_) {
    throw ConfigError("fuse: expected " + std::to_string(kinds_) + " interest blocks");
  }
  for (nn::Var p : parts) {
    if (t.value(p).cols() != head_dim_) {
      throw ConfigError("fuse: interest block has width " + std::to_string(t.value(p).cols()));
    }
  }
  nn::Var z = nn::concat_cols(t, parts);
  nn::Var g = gate_.forward(t, store, z);
  nn::Var x = nn::matmul(t, nn::mul(t, g, z), t.parameter(store, projection_name()));
  return {x, g};
}

CtrHead::CtrHead(std::string name, std::size_t input_dim, std::vector<std::size_t> hidden)
    : mlp_(std::move(name), ctr_dims(input_dim, hidden), nn::Activation::kPrelu,
           nn::Activation::kNone) {}

void CtrHead::init(nn::ParameterStore& store, Rng& rng) const { mlp_.init(store, rng); }

nn::Var CtrHead::logits(nn::Tape& t, nn::ParameterStore& store,
                        std::span<const nn::Var> parts) const {
  std::vector<nn::Var> used;
  for (nn::Var p : parts) {
    if (p.valid() && t.value(p).cols() > 0) used.push_back(p);
  }
  nn::Var x = used.size() == 1 ? used.front() : nn::concat_cols(t, used);
  return mlp_.forward(t, store, x);
}

double predict_probability(double logit) { return nn::stable_sigmoid(logit); }

}  // namespace genli
