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

// Command-line front end: gen-data, train, eval, bench and plot over one
// key=value config file. Flags override file values; the effective config is
// written next to every output.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "genli/baselines.hpp"
#include "genli/errors.hpp"
#include "genli/evalbench.hpp"
#include "genli/model.hpp"
#include "genli/runtime.hpp"
#include "genli/trainer.hpp"

namespace fs = std::filesystem;
using namespace genli;

namespace {

struct Options {
  // Paths.
  std::string data_dir = "data";
  std::string out_dir = "run";
  std::string checkpoint;  // eval: defaults to out_dir/model.ckpt
  std::string resume;      // train: epoch checkpoint to continue from
  std::string eval_data;   // eval: defaults to data_dir/valid.tsv

  // Synthetic data.
  data::SyntheticSpec synthetic;
  double val_fraction = 0.1;

  // Model.
  std::string model = "genli";
  EmbeddingConfig embedding;
  GenliConfig genli;
  BaselineConfig baseline;
  std::vector<std::string> kinds = {"implicit", "explicit", "relative"};
  std::uint64_t init_seed = 11;

  // Training.
  TrainConfig train;

  // Benchmarks.
  std::vector<std::string> bench = {"scoring", "latency"};
  std::vector<std::string> bench_methods;
  ScoringBenchConfig scoring;
  LatencyBenchConfig latency;
};

// Defaults that differ from the library structs: the synthetic generator's
// planted-interest setting used for the learning check.
Options default_options() {
  Options o;
  o.synthetic = data::planted_interest_spec();
  for (ScoringMethod m : o.scoring.methods) o.bench_methods.push_back(to_string(m));
  return o;
}

void add_options(CLI::App& app, Options& o) {
  const char* setup = "experiment-setup default";
  auto note = [](const std::string& what, const char* source) {
    return source ? what + " (" + source + ")" : what;
  };

  auto* paths = app.add_option_group("paths");
  paths->add_option("--data_dir", o.data_dir, "dataset directory")->capture_default_str();
  paths->add_option("--out_dir", o.out_dir, "run output directory")->capture_default_str();
  paths->add_option("--checkpoint", o.checkpoint, "eval checkpoint (default out_dir/model.ckpt)");
  paths->add_option("--resume", o.resume, "train: epoch checkpoint to continue from");
  paths->add_option("--eval_data", o.eval_data, "eval dataset (default data_dir/valid.tsv)");

  auto* syn = app.add_option_group("synthetic");
  auto& s = o.synthetic;
  syn->add_option("--users", s.users, "synthetic users")->capture_default_str();
  syn->add_option("--items", s.items, "catalogue items")->capture_default_str();
  syn->add_option("--categories", s.categories, "item categories")->capture_default_str();
  syn->add_option("--clusters_per_user", s.clusters_per_user, "interest clusters per user")
      ->capture_default_str();
  syn->add_option("--sequence_length", s.sequence_length, "history length L")
      ->capture_default_str();
  syn->add_option("--impressions_per_user", s.impressions_per_user, "impressions per user")
      ->capture_default_str();
  syn->add_option("--phase_share", s.phase_share, "history share drawn from the phase cluster")
      ->capture_default_str();
  syn->add_option("--linked_targets", s.linked_targets,
                  "impression share showing the linked category of the current cluster")
      ->capture_default_str();
  syn->add_option("--linked_in_cluster", s.linked_in_cluster,
                  "probability that the linked category is one of the user's clusters")
      ->capture_default_str();
  syn->add_option("--niche_targets", s.niche_targets,
                  "impression share showing the rarely shown, often clicked niche category")
      ->capture_default_str();
  syn->add_option("--niche_in_cluster", s.niche_in_cluster,
                  "probability that the niche category is one of the user's clusters")
      ->capture_default_str();
  syn->add_option("--promoted_targets", s.promoted_targets,
                  "impression share showing the often shown, rarely clicked promoted category")
      ->capture_default_str();
  syn->add_option("--promoted_in_cluster", s.promoted_in_cluster,
                  "probability that the promoted category is one of the user's clusters")
      ->capture_default_str();
  syn->add_option("--p_promoted_hi", s.p_promoted_hi,
                  "click probability of a promoted item inside the user's clusters")
      ->capture_default_str();
  syn->add_option("--in_cluster_targets", s.in_cluster_targets,
                  "share of the other impressions drawn from the user's clusters")
      ->capture_default_str();
  syn->add_option("--p_hi", s.p_hi, "click probability inside the user's clusters")
      ->capture_default_str();
  syn->add_option("--p_lo", s.p_lo, "click probability outside")->capture_default_str();
  syn->add_option("--log_exposures", s.log_exposures, "record impressions as exposures")
      ->capture_default_str();
  syn->add_option("--data_seed", s.seed, "generator seed")->capture_default_str();
  syn->add_option("--val_fraction", o.val_fraction, "user share held out for validation")
      ->capture_default_str();

  auto* model = app.add_option_group("model");
  model->add_option("--model", o.model,
                    "genli | avg_pool | sim_hard | sim_soft | eta_simhash | twin_attention")
      ->capture_default_str();
  model->add_option("--item_dim", o.embedding.item_dim, note("item embedding width", setup))
      ->capture_default_str();
  model->add_option("--category_dim", o.embedding.category_dim,
                    note("category embedding width", setup))
      ->capture_default_str();
  model->add_option("--heads", o.genli.heads, note("attention heads H", setup))
      ->capture_default_str();
  model->add_option("--head_dim", o.genli.head_dim, note("per-head width d_h", setup))
      ->capture_default_str();
  model->add_option("--distribution_size", o.genli.distribution_size,
                    note("interest distribution size N", setup))
      ->capture_default_str();
  model->add_option("--window", o.genli.window, "short-term window l")->capture_default_str();
  model->add_option("--top_k", o.genli.top_k, note("behaviors retrieved per distribution k", setup))
      ->capture_default_str();
  model->add_option("--retrieve_k", o.baseline.top_k,
                    note("behaviors retrieved by a baseline K", setup))
      ->capture_default_str();
  model->add_option("--interest_hidden", o.genli.interest_hidden, "interest MLP hidden widths")
      ->delimiter(',')
      ->capture_default_str();
  model->add_option("--ctr_hidden", o.genli.ctr_hidden, "CTR MLP hidden widths")
      ->delimiter(',')
      ->capture_default_str();
  model->add_option("--alpha", o.genli.alpha, note("implicit loss weight", setup))
      ->capture_default_str();
  model->add_option("--beta", o.genli.beta, note("explicit loss weight", setup))
      ->capture_default_str();
  model->add_option("--kinds", o.kinds, "distributions used for retrieval")
      ->delimiter(',')
      ->capture_default_str();
  model->add_option("--hash_bits", o.baseline.hash_bits, "SimHash bits m")->capture_default_str();
  model->add_option("--init_seed", o.init_seed, "parameter initialization seed")
      ->capture_default_str();

  auto* tr = app.add_option_group("training");
  tr->add_option("--lr", o.train.adam.learning_rate, note("Adam learning rate", setup))
      ->capture_default_str();
  tr->add_option("--batch_size", o.train.batch_size, note("training batch size", setup))
      ->capture_default_str();
  tr->add_option("--epochs", o.train.epochs, "training epochs")->capture_default_str();
  tr->add_option("--seed", o.train.seed, "shuffle and negative-sampling seed")
      ->capture_default_str();
  tr->add_option("--shuffle", o.train.shuffle, "shuffle samples every epoch")
      ->capture_default_str();
  tr->add_option("--patience", o.train.patience, "early-stop patience in epochs, 0 disables")
      ->capture_default_str();
  tr->add_option("--eval_batch_size", o.train.eval_batch_size, "evaluation batch size")
      ->capture_default_str();

  auto* b = app.add_option_group("bench");
  b->add_option("--bench", o.bench, "suites to run: scoring, latency")
      ->delimiter(',')
      ->capture_default_str();
  b->add_option("--bench_methods", o.bench_methods, "scoring kernels")
      ->delimiter(',')
      ->capture_default_str();
  b->add_option("--bench_lengths", o.scoring.lengths, "L sweep")
      ->delimiter(',')
      ->capture_default_str();
  b->add_option("--bench_head_dims", o.scoring.head_dims, "d_h sweep")
      ->delimiter(',')
      ->capture_default_str();
  b->add_option("--bench_length", o.scoring.length, "L for the d_h sweep")->capture_default_str();
  b->add_option("--bench_head_dim", o.scoring.head_dim, "d_h for the L sweep")
      ->capture_default_str();
  b->add_option("--bench_repetitions", o.scoring.repetitions, "timed repetitions")
      ->capture_default_str();
  b->add_option("--bench_min_ms", o.scoring.min_repetition_ms, "minimum repetition length")
      ->capture_default_str();
  b->add_option("--latency_batch", o.latency.batch, note("samples per latency batch", setup))
      ->capture_default_str();
  b->add_option("--latency_length", o.latency.length, "history length in the latency bench")
      ->capture_default_str();
  b->add_option("--latency_candidates", o.latency.candidates_per_user,
                "candidates scored per user request")
      ->delimiter(',')
      ->capture_default_str();
  b->add_option("--latency_repetitions", o.latency.repetitions, "timed latency repetitions")
      ->capture_default_str();
  b->add_option("--bench_seed", o.scoring.seed, "benchmark input seed")->capture_default_str();
}

// Copies the shared model keys into the configs that need them.
void resolve(Options& o, std::size_t item_vocab, std::size_t category_vocab) {
  o.embedding.item_vocab_size = item_vocab;
  o.embedding.category_vocab_size = category_vocab;
  o.genli.embedding = o.embedding;
  o.genli.use_kind = {false, false, false};
  for (const std::string& k : o.kinds) {
    if (k == "implicit") {
      o.genli.use_kind[0] = true;
    } else if (k == "explicit") {
      o.genli.use_kind[1] = true;
    } else if (k == "relative") {
      o.genli.use_kind[2] = true;
    } else {
      throw ConfigError("unknown distribution kind '" + k + "'");
    }
  }
  o.baseline.embedding = o.embedding;
  o.baseline.heads = o.genli.heads;
  o.baseline.head_dim = o.genli.head_dim;
  o.baseline.window = o.genli.window;
  o.baseline.ctr_hidden = o.genli.ctr_hidden;
}

std::unique_ptr<CtrModel> make_model(const Options& o) {
  if (o.model == "genli") return std::make_unique<GenliModel>(o.genli);
  BaselineConfig cfg = o.baseline;
  cfg.method = parse_scoring_method(o.model);
  return std::make_unique<BaselineModel>(cfg);
}

// Fails before any compute when a setting is out of range.
void validate_model(const Options& o) {
  if (o.model == "genli") {
    validate(o.genli);
  } else {
    BaselineConfig cfg = o.baseline;
    cfg.method = parse_scoring_method(o.model);
    validate(cfg);
  }
}

void write_effective_config(const CLI::App& app, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.ini");
  if (!out) throw DataError("cannot write " + (dir / "config.ini").string());
  out << app.config_to_str(true, false);
}

std::uint64_t fnv1a(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h = (h ^ static_cast<unsigned char>(buf[i])) * 0x100000001b3ull;
    }
  }
  return h;
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw DataError("missing file " + p.string());
}

void make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) {
    throw DataError("cannot create directory " + p.string() + ": " + ec.message());
  }
}

int cmd_gen_data(const CLI::App& app, Options& o) {
  validate(o.synthetic);
  const fs::path dir = o.data_dir;
  make_dir(dir);
  const SyntheticSplit split = prepare_synthetic(o.synthetic, o.val_fraction, o.train.seed);
  const fs::path train = dir / "train.tsv";
  const fs::path valid = dir / "valid.tsv";
  data::write_dataset(split.train, train);
  data::write_dataset(split.validation, valid);
  write_effective_config(app, dir);
  std::printf("impressions=%zu train=%zu valid=%zu\n", split.impressions,
              split.train.samples.size(), split.validation.samples.size());
  for (const fs::path& p : {train, valid}) {
    std::printf("%s fnv1a=%016llx\n", p.string().c_str(),
                static_cast<unsigned long long>(fnv1a(p)));
  }
  return 0;
}

int cmd_train(const CLI::App& app, Options& o) {
  validate(o.train);
  resolve(o, 2, 2);
  validate_model(o);
  const fs::path train_path = fs::path(o.data_dir) / "train.tsv";
  const fs::path valid_path = fs::path(o.data_dir) / "valid.tsv";
  require_file(train_path);
  if (!o.resume.empty()) require_file(o.resume);
  const fs::path out = o.out_dir;
  make_dir(out);

  const data::DatasetSchema schema{o.synthetic.sequence_length, {}, {}};
  const data::Dataset train = data::load_dataset(train_path, schema);
  data::Dataset valid;
  const bool has_valid = fs::exists(valid_path);
  if (has_valid) valid = data::load_dataset(valid_path, schema);
  resolve(o, std::max(train.item_vocab_size, valid.item_vocab_size),
          std::max(train.category_vocab_size, valid.category_vocab_size));
  const auto model = make_model(o);

  nn::ParameterStore store;
  model->init(store, o.init_seed);
  if (!o.resume.empty()) nn::load_checkpoint(store, o.resume);
  write_effective_config(app, out);

  TrainConfig tc = o.train;
  tc.checkpoint_dir = out;
  tc.on_epoch = [](const EpochStats& e) {
    std::printf("%s\n", format_epoch(e).c_str());
    std::fflush(stdout);
  };
  const TrainReport report = genli::train(*model, store, train, has_valid ? &valid : nullptr, tc);
  write_report_csv(report, out / "report.csv", false);
  write_report_csv(report, out / "report_timing.csv", true);
  if (!report.epochs.empty()) {
    std::printf("best_epoch=%zu report=%s\n", report.best_epoch,
                (out / "report.csv").string().c_str());
  }
  return 0;
}

std::size_t table_rows(const nn::CheckpointContents& c, const std::string& name) {
  for (const auto& e : c.entries) {
    if (e.name == name) return e.tensor.rows();
  }
  throw DataError("checkpoint has no tensor " + name);
}

int cmd_eval(const CLI::App& app, Options& o) {
  const fs::path ckpt = o.checkpoint.empty() ? fs::path(o.out_dir) / "model.ckpt" : fs::path(o.checkpoint);
  const fs::path data_path =
      o.eval_data.empty() ? fs::path(o.data_dir) / "valid.tsv" : fs::path(o.eval_data);
  resolve(o, 2, 2);
  validate_model(o);
  require_file(ckpt);
  require_file(data_path);
  const fs::path out = o.out_dir;
  make_dir(out);

  const nn::CheckpointContents contents = nn::read_checkpoint(ckpt);
  resolve(o, table_rows(contents, "embedding.item"), table_rows(contents, "embedding.category"));
  const auto model = make_model(o);
  nn::ParameterStore store;
  model->init(store, o.init_seed);
  nn::load_checkpoint(store, ckpt);

  const data::DatasetSchema schema{o.synthetic.sequence_length, {}, {}};
  const data::Dataset ds = data::load_dataset(data_path, schema);
  const EvalReport r = eval_model(*model, store, ds, o.train.eval_batch_size);
  write_eval_report(r, out / "eval.csv", false);
  write_eval_report(r, out / "eval_timing.csv", true);
  write_effective_config(app, out);
  std::printf("model=%s samples=%zu auc=%.6f log_loss=%.6f igm_ms=%.1f brm_ms=%.1f ifm_ms=%.1f\n",
              r.model.c_str(), r.samples, r.auc, r.log_loss, r.stages.igm_ms, r.stages.brm_ms,
              r.stages.ifm_ms);
  return 0;
}

int cmd_bench(const CLI::App& app, Options& o) {
  bool scoring = false, latency = false;
  for (const std::string& b : o.bench) {
    if (b == "scoring") {
      scoring = true;
    } else if (b == "latency") {
      latency = true;
    } else {
      throw ConfigError("unknown bench suite '" + b + "'");
    }
  }
  o.scoring.methods.clear();
  for (const std::string& m : o.bench_methods) o.scoring.methods.push_back(parse_scoring_method(m));
  o.scoring.hash_bits = o.baseline.hash_bits;
  o.scoring.heads = o.genli.heads;
  o.scoring.distribution_size = o.genli.distribution_size;
  o.scoring.top_k = o.genli.top_k;
  o.latency.seed = o.scoring.seed + 4;
  if (scoring) validate(o.scoring);
  if (latency) validate(o.latency);
  const fs::path out = o.out_dir;
  make_dir(out);
  write_effective_config(app, out);

  if (scoring) {
    const auto results = bench_scoring(o.scoring);
    write_scoring_csv(results, out / "scoring.csv");
    for (const BenchResult& r : results) {
      std::printf("%-15s L=%-6zu d_h=%-4zu ns/behavior median=%.3f p99=%.3f total_ms=%.4f\n",
                  to_string(r.method), r.length, r.head_dim, r.ns_per_behavior.median,
                  r.ns_per_behavior.p99, r.total_ms);
    }
    try {
      const ScalingSummary s = summarize_scaling(results, o.scoring);
      write_scaling_csv(s, out / "scaling.csv");
      std::printf("lookup_length_r2=%.4f lookup_head_dim_ratio=%.2f "
                  "inner_product_head_dim_ratio=%.2f\n",
                  s.lookup_length_r2, s.lookup_head_dim_ratio, s.inner_product_head_dim_ratio);
    } catch (const ConfigError& e) {
      std::printf("scaling summary skipped: %s\n", e.what());
    }
  }
  if (latency) {
    const auto results = bench_latency(o.latency);
    write_latency_csv(results, out / "latency.csv");
    for (const LatencyResult& r : results) {
      std::printf("%-15s batch=%zu L=%zu candidates/user=%zu median_ms=%.1f p99_ms=%.1f "
                  "(%.1f / %.1f / %.1f)\n",
                  r.model.c_str(), r.batch, r.length, r.candidates_per_user, r.batch_ms.median,
                  r.batch_ms.p99, r.mean_stages.igm_ms, r.mean_stages.brm_ms,
                  r.mean_stages.ifm_ms);
    }
  }
  return 0;
}

// ---- plot ------------------------------------------------------------------

using Table = std::vector<std::map<std::string, std::string>>;

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty csv " + path.string());
  const auto header = split(line);
  Table rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw DataError("ragged csv " + path.string());
    auto& row = rows.emplace_back();
    for (std::size_t i = 0; i < cells.size(); ++i) row[header[i]] = cells[i];
  }
  return rows;
}

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Log-log line chart.
void write_line_svg(const fs::path& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<Series>& series) {
  const double w = 720, h = 440, left = 70, right = 170, top = 40, bottom = 50;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (x <= 0 || y <= 0) continue;
      x0 = std::min(x0, std::log10(x));
      x1 = std::max(x1, std::log10(x));
      y0 = std::min(y0, std::log10(y));
      y1 = std::max(y1, std::log10(y));
    }
  }
  if (x0 > x1) throw DataError("nothing to plot for " + path.string());
  if (x1 - x0 < 1e-9) x1 = x0 + 1;
  y0 = std::floor(y0);
  y1 = std::max(std::ceil(y1), y0 + 1);
  auto px = [&](double x) { return left + (std::log10(x) - x0) / (x1 - x0) * (w - left - right); };
  auto py = [&](double y) { return top + (y1 - std::log10(y)) / (y1 - y0) * (h - top - bottom); };
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
  for (double e = y0; e <= y1 + 1e-9; e += 1) {
    const double y = top + (y1 - e) / (y1 - y0) * (h - top - bottom);
    out << "<line x1=\"" << left << "\" x2=\"" << w - right << "\" y1=\"" << y << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n<text x=\"" << left - 6 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  out << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n"
      << "<text transform=\"translate(16," << (top + h - bottom) / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << y_label << "</text>\n";
  std::vector<double> ticks;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) ticks.push_back(x);
  }
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
  for (double x : ticks) {
    out << "<text x=\"" << px(x) << "\" y=\"" << h - bottom + 16 << "\" text-anchor=\"middle\">"
        << x << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* c = colors[i % 8];
    out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    for (auto [x, y] : series[i].points) out << px(x) << ',' << py(y) << ' ';
    out << "\"/>\n";
    const double ly = top + 18.0 * static_cast<double>(i);
    out << "<line x1=\"" << w - right + 12 << "\" x2=\"" << w - right + 32 << "\" y1=\"" << ly
        << "\" y2=\"" << ly << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << w - right + 38 << "\" y=\"" << ly + 4 << "\">" << series[i].name
        << "</text>\n";
  }
  out << "</svg>\n";
}

int cmd_plot(Options& o) {
  const fs::path dir = o.out_dir;
  int written = 0;
  if (fs::exists(dir / "scoring.csv")) {
    const Table rows = read_csv(dir / "scoring.csv");
    std::map<std::string, Series> by_length, by_dim;
    for (const auto& r : rows) {
      const std::string m = r.at("method");
      const double len = std::stod(r.at("length"));
      const double dh = std::stod(r.at("head_dim"));
      if (static_cast<std::size_t>(dh) == o.scoring.head_dim) {
        by_length[m].name = m;
        by_length[m].points.emplace_back(len, std::stod(r.at("total_ms")));
      }
      if (static_cast<std::size_t>(len) == o.scoring.length) {
        by_dim[m].name = m;
        by_dim[m].points.emplace_back(dh, std::stod(r.at("ns_per_behavior_median")));
      }
    }
    auto flatten = [](std::map<std::string, Series>& m) {
      std::vector<Series> out;
      for (auto& [name, s] : m) {
        std::sort(s.points.begin(), s.points.end());
        out.push_back(s);
      }
      return out;
    };
    write_line_svg(dir / "scoring_vs_length.svg", "Retrieval time per target vs history length",
                   "L", "ms", flatten(by_length));
    write_line_svg(dir / "scoring_vs_head_dim.svg", "Scoring time per behavior vs head width",
                   "d_h", "ns / behavior", flatten(by_dim));
    written += 2;
  }
  if (fs::exists(dir / "latency.csv")) {
    const Table rows = read_csv(dir / "latency.csv");
    std::map<std::string, Series> by_model;
    for (const auto& r : rows) {
      const std::string m = r.at("model");
      by_model[m].name = m;
      by_model[m].points.emplace_back(std::stod(r.at("candidates_per_user")),
                                      std::stod(r.at("batch_ms_median")));
    }
    std::vector<Series> series;
    for (auto& [name, s] : by_model) {
      std::sort(s.points.begin(), s.points.end());
      series.push_back(s);
    }
    write_line_svg(dir / "latency.svg", "Batch inference time vs candidates per user",
                   "candidates per user", "ms per batch", series);
    ++written;
  }
  if (written == 0) throw DataError("no scoring.csv or latency.csv in " + dir.string());
  std::printf("wrote %d chart(s) to %s\n", written, dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"GenLI: generative long-term interest CTR model"};
  app.set_config("--config", "", "key=value config file; flags override its values");
  app.require_subcommand(1);
  Options o = default_options();
  add_options(app, o);
  auto* gen = app.add_subcommand("gen-data", "generate a planted-interest dataset");
  auto* train = app.add_subcommand("train", "train a model on data_dir/train.tsv");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  auto* bench = app.add_subcommand("bench", "scoring and latency benchmarks");
  auto* plot = app.add_subcommand("plot", "SVG charts from the bench CSVs in out_dir");
  for (auto* sub : {gen, train, eval, bench, plot}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (gen->parsed()) return cmd_gen_data(app, o);
    if (train->parsed()) return cmd_train(app, o);
    if (eval->parsed()) return cmd_eval(app, o);
    if (bench->parsed()) return cmd_bench(app, o);
    return cmd_plot(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return 4;
  }
}
