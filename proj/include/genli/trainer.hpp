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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "genli/data.hpp"
#include "genli/model.hpp"
#include "genli/nn/parameter_store.hpp"

namespace genli {

struct TrainConfig {
  nn::AdamConfig adam;  // lr 0.001
  std::size_t batch_size = 256;
  std::size_t epochs = 5;
  std::uint64_t seed = 2024;
  bool shuffle = true;
  // Early stop when validation AUC has not improved for this many epochs;
  // 0 disables it.
  std::size_t patience = 3;
  std::size_t eval_batch_size = 1024;
  // When set, epoch_<n>.ckpt is written after every epoch and model.ckpt
  // holds the parameters of the best (or, without validation, last) epoch.
  std::filesystem::path checkpoint_dir;
  // Called after every epoch (logging).
  std::function<void(const struct EpochStats&)> on_epoch;
};

void validate(const TrainConfig& cfg);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  std::size_t steps = 0;
  double loss_ctr = 0.0;
  double loss_implicit = 0.0;
  double loss_explicit = 0.0;
  double loss_total = 0.0;
  double val_auc = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

// Per-sample loss: cross-entropy of the click probability plus the weighted
// auxiliary terms. Reference form of the batched tape loss.
double total_loss(double y_hat, int label, std::span<const double> p_explicit,
                  std::span<const double> p_implicit, const data::Sample& sample, double alpha,
                  double beta);

// CSV with one row per epoch. Wall-clock is a separate column set so the
// deterministic part of the report can be compared byte for byte.
void write_report_csv(const TrainReport& report, const std::filesystem::path& path,
                      bool include_timing);
std::string format_epoch(const EpochStats& e);

// Trailing moving average of the per-epoch mean training loss.
std::vector<double> smoothed_losses(const TrainReport& report, std::size_t window = 5);

// Runs the model over `samples` without gradients and returns click
// probabilities in sample order.
std::vector<double> predict(const CtrModel& model, nn::ParameterStore& store,
                            std::span<const data::Sample> samples, std::size_t batch_size = 1024);

// Optimizes an initialized (or checkpoint-restored) store. Training resumes
// at epoch store.step() / steps_per_epoch + 1, so a run restored from an
// epoch checkpoint continues exactly as the uninterrupted one would.
// DataError on an empty dataset, NumericalError naming the first
// non-finite tensor when the loss stops being finite.
TrainReport train(const CtrModel& model, nn::ParameterStore& store, const data::Dataset& train_set,
                  const data::Dataset* validation, const TrainConfig& cfg);

// 1:1 negative sampling per user. Every positive is kept; as many negatives
// are drawn uniformly without replacement from the user's non-clicked
// impressions. When those run short, the remainder are random catalogue
// items the user did not click (category from `category_of_item`). Users
// without a positive are dropped. Output keeps users in first-seen order,
// positives then negatives.
data::Dataset negative_sample(const data::Dataset& raw,
                              const std::vector<std::uint32_t>& category_of_item,
                              std::uint64_t seed);

// Deterministic user-level split: a user lands in the validation part with
// probability `fraction`.
std::pair<data::Dataset, data::Dataset> split_by_user(const data::Dataset& ds, double fraction,
                                                      std::uint64_t seed);

// Synthetic impressions, 1:1 negative sampling and a user-level split, as
// used by the CLI and the acceptance run.
struct SyntheticSplit {
  data::Dataset train;
  data::Dataset validation;
  std::size_t impressions = 0;
};
SyntheticSplit prepare_synthetic(const data::SyntheticSpec& spec, double validation_fraction,
                                 std::uint64_t seed);

}  // namespace genli
