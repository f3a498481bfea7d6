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

#include "genli/nn/parameter_store.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "genli/errors.hpp"

namespace genli::nn {

Parameter& ParameterStore::add(const std::string& name, Tensor2D init,
                               ParameterOptions options) {
  if (params_.contains(name)) {
    throw ConfigError("parameter '" + name + "' registered twice");
  }
  Parameter p;
  p.name = name;
  p.grad = Tensor2D(init.rows(), init.cols());
  p.first_moment = Tensor2D(init.rows(), init.cols());
  p.second_moment = Tensor2D(init.rows(), init.cols());
  p.value = std::move(init);
  p.options = options;
  if (options.freeze_row0 && p.value.rows() > 0) {
    for (double& v : p.value.row(0)) v = 0.0;
  }
  return params_.emplace(name, std::move(p)).first->second;
}

Parameter& ParameterStore::at(std::string_view name) {
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
  }
  return it->second;
}

const Parameter& ParameterStore::at(std::string_view name) const {
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
  }
  return it->second;
}

bool ParameterStore::contains(std::string_view name) const {
  return params_.find(name) != params_.end();
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& [_, p] : params_) p.grad.fill(0.0);
}

std::string ParameterStore::first_non_finite() const {
  for (const auto& [name, p] : params_) {
    if (!p.value.all_finite()) return name;
    if (!p.grad.all_finite()) return name + " (gradient)";
  }
  return {};
}

void adam_step(ParameterStore& store, const AdamConfig& config) {
  store.advance_step();
  const double t = static_cast<double>(store.step());
  const double first_correction = 1.0 - std::pow(config.beta1, t);
  const double second_correction = 1.0 - std::pow(config.beta2, t);

  for (auto& [_, p] : store) {
    const std::size_t cols = p.value.cols();
    const std::size_t first_row = p.options.freeze_row0 ? 1 : 0;
    for (std::size_t r = first_row; r < p.value.rows(); ++r) {
      auto g = p.grad.row(r);
      bool any = false;
      for (double v : g) any |= (v != 0.0);
      if (!any) continue;
      auto theta = p.value.row(r);
      auto m = p.first_moment.row(r);
      auto v = p.second_moment.row(r);
      for (std::size_t c = 0; c < cols; ++c) {
        m[c] = config.beta1 * m[c] + (1.0 - config.beta1) * g[c];
        v[c] = config.beta2 * v[c] + (1.0 - config.beta2) * g[c] * g[c];
        const double m_hat = m[c] / first_correction;
        const double v_hat = v[c] / second_correction;
        theta[c] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
      }
    }
    p.grad.fill(0.0);
  }
}

namespace {

constexpr char kMagic[8] = {'G', 'E', 'N', 'L', 'I', 'C', 'K', 'P'};

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::filesystem::path& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("checkpoint " + path.string() + " is truncated");
  return value;
}

void write_entry(std::ostream& out, const std::string& name,
                 const Tensor2D& t) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_pod<std::uint64_t>(out, t.rows());
  write_pod<std::uint64_t>(out, t.cols());
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
}

}  // namespace

void save_checkpoint(const ParameterStore& store,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, kCheckpointVersion);
  write_pod<std::uint64_t>(out, store.step());
  write_pod<std::uint64_t>(out, 3 * store.size());
  for (const auto& [name, p] : store) {
    write_entry(out, name, p.value);
    write_entry(out, name + "#m", p.first_moment);
    write_entry(out, name + "#v", p.second_moment);
  }
  if (!out) throw ConfigError("failed writing checkpoint " + path.string());
}

CheckpointContents read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path.string() + " is not a GenLI checkpoint");
  }
  CheckpointContents contents;
  contents.version = read_pod<std::uint32_t>(in, path);
  if (contents.version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " +
                    std::to_string(contents.version));
  }
  contents.step = read_pod<std::uint64_t>(in, path);
  const auto count = read_pod<std::uint64_t>(in, path);
  contents.entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rows = read_pod<std::uint64_t>(in, path);
    const auto cols = read_pod<std::uint64_t>(in, path);
    std::vector<double> values(rows * cols);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw DataError("checkpoint " + path.string() + " is truncated");
    contents.entries.push_back({std::move(name), Tensor2D(rows, cols, std::move(values))});
  }
  return contents;
}

void load_checkpoint(ParameterStore& store, const std::filesystem::path& path) {
  CheckpointContents contents = read_checkpoint(path);
  std::unordered_map<std::string, Tensor2D*> by_name;
  for (auto& e : contents.entries) by_name[e.name] = &e.tensor;

  auto take = [&](const std::string& name, Tensor2D& dest) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw ConfigError("checkpoint lacks tensor '" + name + "'");
    }
    if (!it->second->same_shape(dest)) {
      throw ConfigError("checkpoint tensor '" + name + "' is " +
                        it->second->shape_string() + ", model expects " +
                        dest.shape_string());
    }
    dest = std::move(*it->second);
  };
  for (auto& [name, p] : store) {
    take(name, p.value);
    take(name + "#m", p.first_moment);
    take(name + "#v", p.second_moment);
    p.grad.fill(0.0);
  }
  store.set_step(contents.step);
}

}  // namespace genli::nn
