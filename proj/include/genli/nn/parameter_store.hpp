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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "genli/nn/tensor.hpp"

namespace genli::nn {

struct ParameterOptions {
  // Row 0 is the padding slot of an embedding table: never updated.
  bool freeze_row0 = false;
};

struct Parameter {
  std::string name;
  Tensor2D value;
  Tensor2D grad;
  Tensor2D first_moment;
  Tensor2D second_moment;
  ParameterOptions options;
};

// Owns every trainable tensor together with its gradient slot and Adam
// moments. Parameters are addressed by name; iteration order is the
// lexicographic name order, which keeps checkpoints and gradient sweeps
// deterministic.
class ParameterStore {
 public:
  using Map = std::map<std::string, Parameter, std::less<>>;

  Parameter& add(const std::string& name, Tensor2D init,
                 ParameterOptions options = {});

  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t step) { step_ = step; }
  void advance_step() { ++step_; }

  void zero_grad();

  Map::iterator begin() { return params_.begin(); }
  Map::iterator end() { return params_.end(); }
  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }

  // Name of the first parameter holding a non-finite value or gradient, or
  // empty when everything is finite.
  std::string first_non_finite() const;

 private:
  Map params_;
  std::uint64_t step_ = 0;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update over every parameter, then zeroes the
// gradients. Rows whose gradient is exactly zero are left untouched
// (moments included), so embedding rows that no sample referenced keep
// their values.
void adam_step(ParameterStore& store, const AdamConfig& config);

// Binary checkpoint: "GENLICKP", u32 version, u64 step, u64 entry count,
// then per entry u32 name length, name bytes, u64 rows, u64 cols and the
// row-major float64 payload. Adam moments are stored as "<name>#m" and
// "<name>#v".
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor2D tensor;
};

struct CheckpointContents {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t step = 0;
  std::vector<NamedTensor> entries;
};

void save_checkpoint(const ParameterStore& store,
                     const std::filesystem::path& path);
CheckpointContents read_checkpoint(const std::filesystem::path& path);
// Restores values, moments and the step counter into an already-shaped
// store. Missing entries or shape mismatches raise ConfigError.
void load_checkpoint(ParameterStore& store, const std::filesystem::path& path);

}  // namespace genli::nn
