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

#include "genli/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "genli/errors.hpp"
#include "genli/igm.hpp"
#include "genli/metrics.hpp"
#include "genli/random.hpp"

namespace genli {

void validate(const TrainConfig& cfg) {
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (cfg.eval_batch_size == 0) throw ConfigError("eval_batch_size must be >= 1");
  if (!(cfg.adam.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(cfg.adam.beta1 >= 0.0 && cfg.adam.beta1 < 1.0 && cfg.adam.beta2 >= 0.0 &&
        cfg.adam.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
}

double total_loss(double y_hat, int label, std::span<const double> p_explicit,
                  std::span<const double> p_implicit, const data::Sample& sample, double alpha,
                  double beta) {
  const double p = std::clamp(y_hat, kLogFloor, 1.0 - kLogFloor);
  const double ctr = label == 1 ? -std::log(p) : -std::log1p(-p);
  double aux = 0.0;
  if (alpha != 0.0) aux += alpha * implicit_loss(p_implicit, data::exposed_or_surrogate(sample));
  if (beta != 0.0) aux += beta * explicit_loss(p_explicit, sample.target.item, label);
  return ctr + aux;
}

namespace {

std::string fixed(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << std::fixed << v;
  return os.str();
}

}  // namespace

void write_report_csv(const TrainReport& report, const std::filesystem::path& path,
                      bool include_timing) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write report " + path.string());
  out << "epoch,steps,loss_ctr,loss_implicit,loss_explicit,loss_total,val_auc";
  if (include_timing) out << ",wall_seconds";
  out << '\n';
  for (const EpochStats& e : report.epochs) {
    out << e.epoch << ',' << e.steps << ',' << fixed(e.loss_ctr) << ',' << fixed(e.loss_implicit)
        << ',' << fixed(e.loss_explicit) << ',' << fixed(e.loss_total) << ',' << fixed(e.val_auc);
    if (include_timing) out << ',' << fixed(e.wall_seconds);
    out << '\n';
  }
}

std::string format_epoch(const EpochStats& e) {
  std::ostringstream os;
  os << "epoch " << e.epoch << ": steps=" << e.steps << " ctr=" << fixed(e.loss_ctr)
     << " implicit=" << fixed(e.loss_implicit) << " explicit=" << fixed(e.loss_explicit)
     << " total=" << fixed(e.loss_total) << " val_auc=" << fixed(e.val_auc) << " ("
     << std::setprecision(3) << std::fixed << e.wall_seconds << " s)";
  return os.str();
}

std::vector<double> smoothed_losses(const TrainReport& report, std::size_t window) {
  std::vector<double> out;
  for (std::size_t i = 0; i < report.epochs.size(); ++i) {
    const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t j = first; j <= i; ++j) sum += report.epochs[j].loss_total;
    out.push_back(sum / static_cast<double>(i + 1 - first));
  }
  return out;
}

std::vector<double> predict(const CtrModel& model, nn::ParameterStore& store,
                            std::span<const data::Sample> samples, std::size_t batch_size) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (std::size_t begin = 0; begin < samples.size(); begin += batch_size) {
    const std::size_t end = std::min(samples.size(), begin + batch_size);
    nn::Tape t;
    ForwardResult r = model.forward(t, store, samples.subspan(begin, end - begin));
    for (double z : t.value(r.logits).values()) out.push_back(predict_probability(z));
  }
  return out;
}

namespace {

double value_or_zero(const nn::Tape& t, nn::Var v) { return v.valid() ? t.value(v)[0] : 0.0; }

double validation_auc(const CtrModel& model, nn::ParameterStore& store,
                      const data::Dataset& validation, std::size_t batch_size) {
  std::vector<double> scores = predict(model, store, validation.samples, batch_size);
  std::vector<int> labels;
  labels.reserve(validation.samples.size());
  for (const auto& s : validation.samples) labels.push_back(s.label);
  return auc(scores, labels);
}

}  // namespace

TrainReport train(const CtrModel& model, nn::ParameterStore& store, const data::Dataset& train_set,
                  const data::Dataset* validation, const TrainConfig& cfg) {
  validate(cfg);
  if (train_set.samples.empty()) throw DataError("train: empty training set");
  if (validation && validation->samples.empty()) validation = nullptr;
  const std::size_t n = train_set.samples.size();
  const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t first_epoch = store.step() / steps_per_epoch + 1;
  if (cfg.checkpoint_dir.empty() == false) std::filesystem::create_directories(cfg.checkpoint_dir);

  TrainReport report;
  double best_auc = -1.0;
  std::size_t since_best = 0;
  std::vector<std::size_t> order(n);
  std::vector<data::Sample> batch;
  batch.reserve(cfg.batch_size);

  for (std::size_t epoch = first_epoch; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    if (cfg.shuffle) {
      Rng rng = Rng::derive(cfg.seed, epoch);
      rng.shuffle(std::span(order));
    }
    EpochStats stats;
    stats.epoch = epoch;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(train_set.samples[order[i]]);
      nn::Tape t;
      ForwardResult r = model.forward(t, store, batch);
      const double total = t.value(r.total)[0];
      if (!std::isfinite(total)) {
        std::string culprit = t.first_non_finite();
        if (culprit.empty()) culprit = store.first_non_finite();
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(store.step() + 1) + "; first non-finite tensor: " +
                             (culprit.empty() ? "loss" : culprit));
      }
      t.backward(r.total);
      const std::string bad_param = store.first_non_finite();
      if (!bad_param.empty()) {
        throw NumericalError("non-finite gradient at epoch " + std::to_string(epoch) +
                             "; first non-finite tensor: " + bad_param);
      }
      nn::adam_step(store, cfg.adam);
      const double w = static_cast<double>(end - begin);
      stats.loss_ctr += w * value_or_zero(t, r.loss_ctr);
      stats.loss_implicit += w * value_or_zero(t, r.loss_implicit);
      stats.loss_explicit += w * value_or_zero(t, r.loss_explicit);
      stats.loss_total += w * total;
      ++stats.steps;
    }
    const double inv = 1.0 / static_cast<double>(n);
    stats.loss_ctr *= inv;
    stats.loss_implicit *= inv;
    stats.loss_explicit *= inv;
    stats.loss_total *= inv;
    if (validation) stats.val_auc = validation_auc(model, store, *validation, cfg.eval_batch_size);
    stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report.epochs.push_back(stats);
    if (cfg.on_epoch) cfg.on_epoch(stats);

    const bool improved = !validation || stats.val_auc > best_auc;
    if (improved) {
      best_auc = validation ? stats.val_auc : best_auc;
      report.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (!cfg.checkpoint_dir.empty()) {
      nn::save_checkpoint(store, cfg.checkpoint_dir / ("epoch_" + std::to_string(epoch) + ".ckpt"));
      if (improved) nn::save_checkpoint(store, cfg.checkpoint_dir / "model.ckpt");
    }
    if (validation && cfg.patience > 0 && since_best >= cfg.patience) {
      report.stopped_early = true;
      break;
    }
  }
  return report;
}

data::Dataset negative_sample(const data::Dataset& raw,
                              const std::vector<std::uint32_t>& category_of_item,
                              std::uint64_t seed) {
  std::vector<std::uint64_t> users;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_user;
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    auto [it, inserted] = by_user.try_emplace(raw.samples[i].user_id);
    if (inserted) users.push_back(raw.samples[i].user_id);
    it->second.push_back(i);
  }
  data::Dataset out;
  out.item_vocab_size = raw.item_vocab_size;
  out.category_vocab_size = raw.category_vocab_size;
  out.sequence_length = raw.sequence_length;
  Rng rng = Rng::derive(seed, 0x6e6567);
  for (std::uint64_t user : users) {
    const auto& rows = by_user[user];
    std::vector<std::size_t> positives, negatives;
    std::unordered_set<std::uint32_t> clicked;
    for (std::size_t i : rows) {
      if (raw.samples[i].label == 1) {
        positives.push_back(i);
        clicked.insert(raw.samples[i].target.item);
      } else {
        negatives.push_back(i);
      }
    }
    if (positives.empty()) continue;
    for (std::size_t i : positives) out.samples.push_back(raw.samples[i]);
    const std::size_t take = std::min(positives.size(), negatives.size());
    // Partial Fisher-Yates: the first `take` entries form a uniform sample.
    for (std::size_t j = 0; j < take; ++j) {
      std::swap(negatives[j], negatives[j + rng.below(negatives.size() - j)]);
    }
    negatives.resize(take);
    std::sort(negatives.begin(), negatives.end());
    for (std::size_t i : negatives) out.samples.push_back(raw.samples[i]);
    for (std::size_t j = take; j < positives.size(); ++j) {
      if (category_of_item.size() <= clicked.size() + 1) {
        throw DataError("negative_sample: no unclicked catalogue item for user " +
                        std::to_string(user));
      }
      std::uint32_t item;
      do {
        item = static_cast<std::uint32_t>(1 + rng.below(category_of_item.size() - 1));
      } while (clicked.contains(item));
      data::Sample s = raw.samples[positives[j]];
      s.target.item = item;
      s.target.category = category_of_item[item];
      s.label = 0;
      s.exposed_item.reset();
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

std::pair<data::Dataset, data::Dataset> split_by_user(const data::Dataset& ds, double fraction,
                                                      std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in [0, 1)");
  }
  std::pair<data::Dataset, data::Dataset> parts;
  for (data::Dataset* d : {&parts.first, &parts.second}) {
    d->item_vocab_size = ds.item_vocab_size;
    d->category_vocab_size = ds.category_vocab_size;
    d->sequence_length = ds.sequence_length;
  }
  for (const data::Sample& s : ds.samples) {
    const bool held_out = Rng::derive(seed, s.user_id).uniform() < fraction;
    (held_out ? parts.second : parts.first).samples.push_back(s);
  }
  return parts;
}

SyntheticSplit prepare_synthetic(const data::SyntheticSpec& spec, double validation_fraction,
                                 std::uint64_t seed) {
  data::SyntheticData syn = data::generate_synthetic(spec);
  SyntheticSplit out;
  out.impressions = syn.impressions.size();
  data::Dataset raw{std::move(syn.impressions), syn.item_vocab_size, syn.category_vocab_size,
                    syn.sequence_length};
  std::vector<std::uint32_t> category(syn.item_vocab_size, data::kPaddingIndex);
  for (std::uint32_t i = 1; i < category.size(); ++i) category[i] = data::synthetic_category(spec, i);
  auto [train, validation] =
      split_by_user(negative_sample(raw, category, seed), validation_fraction, seed + 1);
  out.train = std::move(train);
  out.validation = std::move(validation);
  return out;
}

}  // namespace genli
