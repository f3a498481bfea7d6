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

#include "genli/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "genli/errors.hpp"

namespace genli::nn {

Tensor2D::Tensor2D(std::size_t rows, std::size_t cols,
                   std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ConfigError("Tensor2D: " + std::to_string(values_.size()) +
                      " values do not fill a " + std::to_string(rows_) + "x" +
                      std::to_string(cols_) + " matrix");
  }
}

Tensor2D Tensor2D::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ConfigError("Tensor2D::from_rows: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor2D(r, c, std::move(values));
}

void Tensor2D::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

Tensor2D Tensor2D::reshaped(std::size_t rows, std::size_t cols) const {
  if (rows * cols != values_.size()) {
    throw ConfigError("Tensor2D::reshaped: cannot view " + shape_string() +
                      " as " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  }
  return Tensor2D(rows, cols, values_);
}

bool Tensor2D::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string Tensor2D::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

}  // namespace genli::nn
