// Copyright 2026 The ldlage Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ldlage/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ldlage/data.hpp"
#include "ldlage/error.hpp"
#include "ldlage/inference.hpp"
#include "ldlage/model.hpp"
#include "ldlage/rng.hpp"
#include "ldlage/trainer.hpp"

namespace ldlage {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitMismatch = 4;

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

std::string iso8601_utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("checksum: cannot open '" + path.string() + "'");
  }
  std::uint64_t hash = 14695981039346656037ULL;  // FNV-1a 64
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ULL;
    }
  }
  char out[32];
  std::snprintf(out, sizeof(out), "fnv1a64:%016llx",
                static_cast<unsigned long long>(hash));
  return out;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::pair<int, int> parse_int_range(const std::string& text, const char* what) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw InvalidParameterError(std::string(what) + ": expected LO:HI, got '" +
                                text + "'");
  }
  try {
    const int lo = std::stoi(text.substr(0, colon));
    const int hi = std::stoi(text.substr(colon + 1));
    return {lo, hi};
  } catch (const std::exception&) {
    throw InvalidParameterError(std::string(what) + ": expected LO:HI, got '" +
                                text + "'");
  }
}

std::vector<int> parse_hidden(const std::string& text) {
  std::vector<int> dims;
  if (text.empty() || text == "none") return dims;
  for (const std::string& part : split_list(text, ',')) {
    try {
      dims.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw InvalidParameterError("--hidden: bad layer width '" + part + "'");
    }
  }
  return dims;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& part : split_list(text, ',')) {
    try {
      seeds.push_back(std::stoull(part));
    } catch (const std::exception&) {
      throw InvalidParameterError("--seeds: bad seed '" + part + "'");
    }
  }
  if (seeds.empty()) {
    throw InvalidParameterError("--seeds: empty list");
  }
  return seeds;
}

std::string format_real(double value, const char* fmt = "%.9g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), fmt, value);
  return buf;
}

/// Clip ids may encode their utterance as "<utterance>#<clip>"; everything
/// before the last '#' is the group key.
std::string utterance_key(const std::string& id) {
  const auto pos = id.rfind('#');
  return pos == std::string::npos ? id : id.substr(0, pos);
}

enum class GroupBy { kNone, kUtterance, kSpeaker };

GroupBy parse_group_by(const std::string& text) {
  if (text == "none") return GroupBy::kNone;
  if (text == "utterance") return GroupBy::kUtterance;
  if (text == "speaker") return GroupBy::kSpeaker;
  throw InvalidParameterError("--group-by: expected none, utterance or speaker");
}

/// Writes one manifest next to the artifacts of a run. `out_dir` may be a
/// directory (manifest.json inside) or a file (sibling <name>.manifest.json).
class ManifestWriter {
 public:
  explicit ManifestWriter(std::string command) {
    doc_["command"] = std::move(command);
    doc_["started_at"] = iso8601_utc_now();
  }

  json& config() { return doc_["config"]; }

  void add_input(const std::string& name, const fs::path& path) {
    doc_["inputs"][name] = path.string();
  }

  void add_artifact(const fs::path& path) {
    doc_["outputs"].push_back(path.string());
    doc_["artifacts"][path.filename().string()] = file_checksum(path);
  }

  void write(const fs::path& target) {
    doc_["finished_at"] = iso8601_utc_now();
    const fs::path path = fs::is_directory(target)
                              ? target / "manifest.json"
                              : fs::path(target.string() + ".manifest.json");
    std::ofstream out(path);
    if (!out) {
      throw Error("manifest: cannot open '" + path.string() + "' for writing");
    }
    out << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
};

// ---------------------------------------------------------------------------
// Option bundles
// ---------------------------------------------------------------------------

struct SynthOptions {
  int n = 2000;
  int dim = 32;
  std::string ages = "18:80";
  double noise = 0.5;
  std::string age_dist = "uniform";
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainOptions {
  std::string data;
  std::string method = "ldl";
  double lambda1 = 0.0, lambda2 = 0.0, lambda3 = 0.0, sigma = 0.0;  // overrides
  bool has_l1 = false, has_l2 = false, has_l3 = false, has_sigma = false;
  std::string grid = "1:100";
  std::string hidden = "256";
  TrainConfig train;
  bool deterministic = true;
  std::string out;
};

struct EvaluateOptions {
  std::string model;
  std::string data;
  std::string group_by = "none";
  std::string label;  // defaults to the checkpoint label
  std::string out;
};

struct PredictOptions {
  std::string model;
  std::string data;
  std::string group_by = "none";
  std::string out;
};

struct AblateOptions {
  std::string data;
  std::string seeds = "1,2,3";
  std::string methods;  // empty -> (lambda3, sigma) cell sweep
  std::string cells = "0.01:0.1,0.1:0.5,0.1:1.0,1.0:0.5,1.0:1.0,10.0:3.0";
  double test_fraction = 0.2;
  std::string grid = "1:100";
  std::string hidden = "256";
  int max_epochs = 30;
  TrainConfig train;
  std::string out;
};

HybridLossConfig resolve_loss(const TrainOptions& opt) {
  HybridLossConfig loss = method_config(opt.method).loss;
  if (opt.has_l1) loss.lambda1 = opt.lambda1;
  if (opt.has_l2) loss.lambda2 = opt.lambda2;
  if (opt.has_l3) loss.lambda3 = opt.lambda3;
  if (opt.has_sigma) loss.sigma = opt.sigma;
  loss.validate();
  return loss;
}

json loss_to_json(const HybridLossConfig& loss) {
  return json{{"lambda1", loss.lambda1},
              {"lambda2", loss.lambda2},
              {"lambda3", loss.lambda3},
              {"sigma", loss.sigma}};
}

json train_config_to_json(const TrainConfig& config) {
  return json{{"batch_size", config.batch_size},
              {"initial_lr", config.initial_lr},
              {"momentum", config.momentum},
              {"lr_decay_factor", config.lr_decay_factor},
              {"patience_epochs", config.patience_epochs},
              {"min_lr", config.min_lr},
              {"max_epochs", config.max_epochs},
              {"seed", config.seed},
              {"validation_fraction", config.validation_fraction},
              {"deterministic", config.deterministic}};
}

// ---------------------------------------------------------------------------
// Shared evaluation path
// ---------------------------------------------------------------------------

struct GroupedPrediction {
  std::string key;
  double truth = 0.0;
  double predicted = 0.0;
};

std::vector<GroupedPrediction> predict_grouped(const Checkpoint& checkpoint,
                                               const std::vector<LabeledSample>& samples,
                                               GroupBy group_by) {
  // Group keys keep first-appearance order so output rows are stable.
  std::vector<std::string> order;
  std::map<std::string, std::vector<const LabeledSample*>> groups;
  for (const LabeledSample& sample : samples) {
    std::string key;
    switch (group_by) {
      case GroupBy::kNone:
        key = sample.id;
        break;
      case GroupBy::kUtterance:
        key = utterance_key(sample.id);
        break;
      case GroupBy::kSpeaker:
        key = sample.speaker_id.empty() ? sample.id : sample.speaker_id;
        break;
    }
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&sample);
  }

  std::vector<GroupedPrediction> predictions;
  predictions.reserve(order.size());
  for (const std::string& key : order) {
    const auto& members = groups[key];
    std::vector<ClipPrediction> clips;
    clips.reserve(members.size());
    for (const LabeledSample* sample : members) {
      clips.push_back(predict_clip(checkpoint.head, sample->embedding, checkpoint.grid));
    }
    predictions.push_back({.key = key,
                           .truth = members.front()->age,
                           .predicted = predict_utterance(clips)});
  }
  return predictions;
}

int check_compatible(const Checkpoint& checkpoint,
                     const std::vector<LabeledSample>& samples) {
  if (samples.empty()) {
    std::cerr << "ldlage: dataset is empty\n";
    return kExitUsage;
  }
  const auto dim = static_cast<int>(samples.front().embedding.size());
  if (dim != checkpoint.head.input_dim()) {
    std::cerr << "ldlage: checkpoint expects embeddings of dimension "
              << checkpoint.head.input_dim() << ", dataset has " << dim << "\n";
    return kExitMismatch;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_synth(const SynthOptions& opt) {
  const auto [min_age, max_age] = parse_int_range(opt.ages, "--ages");
  SyntheticSpec spec;
  spec.n_samples = opt.n;
  spec.dim = opt.dim;
  spec.min_age = min_age;
  spec.max_age = max_age;
  spec.noise_sigma = opt.noise;
  spec.seed = opt.seed;
  if (opt.age_dist == "uniform") {
    spec.age_distribution = AgeDistribution::kUniform;
  } else if (opt.age_dist == "twomode") {
    spec.age_distribution = AgeDistribution::kTwoMode;
  } else {
    throw InvalidParameterError("--age-dist: expected uniform or twomode");
  }
  spec.validate();

  ManifestWriter manifest("synth");
  manifest.config() = {{"n", spec.n_samples},     {"dim", spec.dim},
                       {"ages", opt.ages},        {"noise", spec.noise_sigma},
                       {"age_dist", opt.age_dist}, {"seed", spec.seed},
                       {"out", opt.out}};

  const std::vector<LabeledSample> samples = generate_synthetic(spec);
  const fs::path out_path(opt.out);
  if (out_path.has_parent_path()) {
    fs::create_directories(out_path.parent_path());
  }
  save_dataset(out_path, samples);
  std::cout << "wrote " << samples.size() << " samples to " << out_path.string()
            << "\n";
  manifest.add_artifact(out_path);
  manifest.write(out_path);
  return kExitOk;
}

int cmd_train(const TrainOptions& opt) {
  const auto [min_age, max_age] = parse_int_range(opt.grid, "--grid");
  const AgeGrid grid(min_age, max_age);
  const std::vector<int> hidden = parse_hidden(opt.hidden);

  MethodConfig method = method_config(opt.method);
  method.loss = resolve_loss(opt);

  TrainConfig train = opt.train;
  train.deterministic = opt.deterministic;

  const std::vector<LabeledSample> dataset = load_dataset(opt.data);
  if (dataset.empty()) {
    throw InvalidParameterError("train: dataset '" + opt.data + "' is empty");
  }

  ManifestWriter manifest("train");
  manifest.add_input("data", opt.data);
  manifest.config() = {{"method", opt.method},
                       {"loss", loss_to_json(method.loss)},
                       {"grid", opt.grid},
                       {"hidden", opt.hidden},
                       {"train", train_config_to_json(train)},
                       {"out", opt.out}};
  const bool overridden = opt.has_l1 || opt.has_l2 || opt.has_l3 || opt.has_sigma;
  manifest.config()["loss_overridden"] = overridden;

  const ModelHead head = init_head(static_cast<int>(dataset.front().embedding.size()),
                                   hidden, grid.size(), train.seed);
  const FitResult fit_result = fit(head, dataset, grid, method, train);

  fs::create_directories(opt.out);
  const fs::path ckpt_path = fs::path(opt.out) / "checkpoint.txt";
  save_checkpoint(ckpt_path, {.head = fit_result.head,
                              .grid = grid,
                              .loss = method.loss,
                              .label = method.name});

  const fs::path log_path = fs::path(opt.out) / "train_log.csv";
  {
    std::ofstream log(log_path);
    if (!log) {
      throw Error("train: cannot open '" + log_path.string() + "' for writing");
    }
    write_train_log(log, fit_result.report);
  }

  const EpochRecord& last = fit_result.report.epochs.back();
  std::cout << "trained " << fit_result.report.final_epoch << " epochs ("
            << to_string(fit_result.report.stop_reason)
            << "), final val loss " << format_real(last.validation_total) << "\n";

  manifest.add_artifact(ckpt_path);
  manifest.add_artifact(log_path);
  manifest.write(fs::path(opt.out));
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& opt) {
  const Checkpoint checkpoint = load_checkpoint(fs::path(opt.model));
  const std::vector<LabeledSample> samples = load_dataset(opt.data);
  if (const int rc = check_compatible(checkpoint, samples); rc != kExitOk) {
    return rc;
  }
  const GroupBy group_by = parse_group_by(opt.group_by);
  const std::string label = opt.label.empty() ? checkpoint.label : opt.label;

  ManifestWriter manifest("evaluate");
  manifest.add_input("model", opt.model);
  manifest.add_input("data", opt.data);
  manifest.config() = {{"group_by", opt.group_by}, {"label", label}, {"out", opt.out}};

  const std::vector<GroupedPrediction> predictions =
      predict_grouped(checkpoint, samples, group_by);
  std::vector<AgePair> pairs;
  pairs.reserve(predictions.size());
  for (const GroupedPrediction& p : predictions) {
    pairs.push_back({.truth = p.truth, .predicted = p.predicted});
  }
  const EvalResult result = evaluate(pairs);
  const std::string row = format_eval_row(label, result);
  std::cout << row << "\n";

  fs::create_directories(opt.out);
  const fs::path out_path = fs::path(opt.out) / "eval.csv";
  {
    std::ofstream out(out_path);
    if (!out) {
      throw Error("evaluate: cannot open '" + out_path.string() + "' for writing");
    }
    out << "method,mae,pearson,n\n" << row << "\n";
  }
  manifest.add_artifact(out_path);
  manifest.write(fs::path(opt.out));
  return kExitOk;
}

int cmd_predict(const PredictOptions& opt) {
  const Checkpoint checkpoint = load_checkpoint(fs::path(opt.model));
  const std::vector<LabeledSample> samples = load_dataset(opt.data);
  if (const int rc = check_compatible(checkpoint, samples); rc != kExitOk) {
    return rc;
  }
  const GroupBy group_by = parse_group_by(opt.group_by);

  ManifestWriter manifest("predict");
  manifest.add_input("model", opt.model);
  manifest.add_input("data", opt.data);
  manifest.config() = {{"group_by", opt.group_by}, {"out", opt.out}};

  const std::vector<GroupedPrediction> predictions =
      predict_grouped(checkpoint, samples, group_by);

  const fs::path out_path(opt.out);
  if (out_path.has_parent_path()) {
    fs::create_directories(out_path.parent_path());
  }
  std::ofstream out(out_path);
  if (!out) {
    throw Error("predict: cannot open '" + out_path.string() + "' for writing");
  }
  out << "id,predicted_age\n";
  for (const GroupedPrediction& p : predictions) {
    out << p.key << ',' << format_real(p.predicted) << '\n';
  }
  out.close();
  std::cout << "wrote " << predictions.size() << " predictions to "
            << out_path.string() << "\n";
  manifest.add_artifact(out_path);
  manifest.write(out_path);
  return kExitOk;
}

struct AblationCell {
  std::string name;
  MethodConfig method;
};

struct CellOutcome {
  std::vector<double> maes;      // one per seed, NaN for failed runs
  std::vector<double> pearsons;  // NaN when undefined
  std::vector<std::string> status;
  double mean_mae = std::numeric_limits<double>::quiet_NaN();
  double mean_pearson = std::numeric_limits<double>::quiet_NaN();
};

CellOutcome run_cell(const AblationCell& cell, const std::vector<LabeledSample>& dataset,
                     const AgeGrid& grid, const std::vector<int>& hidden,
                     const TrainConfig& base_config, double test_fraction,
                     const std::vector<std::uint64_t>& seeds) {
  CellOutcome outcome;
  double mae_sum = 0.0;
  double rho_sum = 0.0;
  int ok = 0;
  for (const std::uint64_t seed : seeds) {
    try {
      // The split and the initial head depend only on the seed, so every
      // cell sees identical data and identical starting weights.
      auto [train_set, test_set] =
          split_train_validation(dataset, test_fraction, derive_seed(seed, 0x7e57));
      TrainConfig config = base_config;
      config.seed = seed;
      const ModelHead head =
          init_head(static_cast<int>(dataset.front().embedding.size()), hidden,
                    grid.size(), seed);
      const FitResult fit_result = fit(head, train_set, grid, cell.method, config);

      std::vector<AgePair> pairs;
      pairs.reserve(test_set.size());
      for (const LabeledSample& sample : test_set) {
        const ClipPrediction clip =
            predict_clip(fit_result.head, sample.embedding, grid);
        pairs.push_back({.truth = sample.age, .predicted = clip.point_estimate});
      }
      const EvalResult result = evaluate(pairs);
      outcome.maes.push_back(result.mae);
      outcome.pearsons.push_back(result.pearson.value_or(
          std::numeric_limits<double>::quiet_NaN()));
      outcome.status.push_back("ok");
      mae_sum += result.mae;
      if (result.pearson) rho_sum += *result.pearson;
      ++ok;
    } catch (const Error& e) {
      warn("ablation cell '" + cell.name + "' seed " + std::to_string(seed) +
           " failed: " + e.what());
      outcome.maes.push_back(std::numeric_limits<double>::quiet_NaN());
      outcome.pearsons.push_back(std::numeric_limits<double>::quiet_NaN());
      outcome.status.push_back("failed");
    }
  }
  if (ok > 0) {
    outcome.mean_mae = mae_sum / ok;
    outcome.mean_pearson = rho_sum / ok;
  }
  return outcome;
}

int cmd_ablate(const AblateOptions& opt) {
  const auto [min_age, max_age] = parse_int_range(opt.grid, "--grid");
  const AgeGrid grid(min_age, max_age);
  const std::vector<int> hidden = parse_hidden(opt.hidden);
  const std::vector<std::uint64_t> seeds = parse_seeds(opt.seeds);
  if (!(opt.test_fraction > 0.0 && opt.test_fraction < 1.0)) {
    throw InvalidParameterError("--test-fraction must lie in (0, 1)");
  }

  // Either a method comparison (table rows) or a (lambda3, sigma) sweep
  // with lambda1 = lambda2 = 1 (table columns).
  std::vector<AblationCell> cells;
  const bool method_mode = !opt.methods.empty();
  if (method_mode) {
    for (const std::string& name : split_list(opt.methods, ',')) {
      cells.push_back({name, method_config(name)});
    }
  } else {
    for (const std::string& pair : split_list(opt.cells, ',')) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) {
        throw InvalidParameterError("--cells: expected LAMBDA3:SIGMA, got '" + pair +
                                    "'");
      }
      double lambda3 = 0.0;
      double sigma = 0.0;
      try {
        lambda3 = std::stod(pair.substr(0, colon));
        sigma = std::stod(pair.substr(colon + 1));
      } catch (const std::exception&) {
        throw InvalidParameterError("--cells: expected LAMBDA3:SIGMA, got '" + pair +
                                    "'");
      }
      MethodConfig method{"l3=" + format_real(lambda3, "%g") +
                              ",sigma=" + format_real(sigma, "%g"),
                          {.lambda1 = 1.0, .lambda2 = 1.0, .lambda3 = lambda3,
                           .sigma = sigma}};
      method.loss.validate();
      cells.push_back({method.name, std::move(method)});
    }
  }
  if (cells.empty()) {
    throw InvalidParameterError("ablate: no cells requested");
  }

  const std::vector<LabeledSample> dataset = load_dataset(opt.data);
  if (dataset.empty()) {
    throw InvalidParameterError("ablate: dataset '" + opt.data + "' is empty");
  }

  TrainConfig base_config = opt.train;
  base_config.max_epochs = opt.max_epochs;

  ManifestWriter manifest("ablate");
  manifest.add_input("data", opt.data);
  manifest.config() = {{"seeds", opt.seeds},
                       {"methods", opt.methods},
                       {"cells", method_mode ? "" : opt.cells},
                       {"test_fraction", opt.test_fraction},
                       {"grid", opt.grid},
                       {"hidden", opt.hidden},
                       {"max_epochs", opt.max_epochs},
                       {"train", train_config_to_json(base_config)},
                       {"out", opt.out}};

  std::vector<CellOutcome> outcomes;
  outcomes.reserve(cells.size());
  for (const AblationCell& cell : cells) {
    std::cout << "running cell " << cell.name << " (" << seeds.size()
              << " seeds)...\n";
    outcomes.push_back(run_cell(cell, dataset, grid, hidden, base_config,
                                opt.test_fraction, seeds));
  }

  fs::create_directories(opt.out);

  // Per-run rows.
  const fs::path results_path = fs::path(opt.out) / "results.csv";
  {
    std::ofstream out(results_path);
    if (!out) {
      throw Error("ablate: cannot open '" + results_path.string() + "' for writing");
    }
    out << "cell,lambda1,lambda2,lambda3,sigma,seed,mae,pearson,status\n";
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const HybridLossConfig& loss = cells[c].method.loss;
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        out << cells[c].name << ',' << format_real(loss.lambda1, "%g") << ','
            << format_real(loss.lambda2, "%g") << ','
            << format_real(loss.lambda3, "%g") << ','
            << format_real(loss.sigma, "%g") << ',' << seeds[s] << ','
            << format_real(outcomes[c].maes[s]) << ','
            << format_real(outcomes[c].pearsons[s]) << ','
            << outcomes[c].status[s] << '\n';
      }
    }
  }

  // Aggregated table, shaped like the published comparisons: methods go in
  // rows, (lambda3, sigma) cells go in columns.
  const fs::path table_path = fs::path(opt.out) / "table.txt";
  {
    std::ofstream out(table_path);
    if (!out) {
      throw Error("ablate: cannot open '" + table_path.string() + "' for writing");
    }
    char buf[64];
    if (method_mode) {
      out << "method      mae   pearson\n";
      for (std::size_t c = 0; c < cells.size(); ++c) {
        std::snprintf(buf, sizeof(buf), "%-8s %8.3f %8.3f\n", cells[c].name.c_str(),
                      outcomes[c].mean_mae, outcomes[c].mean_pearson);
        out << buf;
      }
    } else {
      out << "lambda3";
      for (const AblationCell& cell : cells) {
        std::snprintf(buf, sizeof(buf), " %8.3g", cell.method.loss.lambda3);
        out << buf;
      }
      out << "\nsigma  ";
      for (const AblationCell& cell : cells) {
        std::snprintf(buf, sizeof(buf), " %8.3g", cell.method.loss.sigma);
        out << buf;
      }
      out << "\nmae    ";
      for (const CellOutcome& outcome : outcomes) {
        std::snprintf(buf, sizeof(buf), " %8.3f", outcome.mean_mae);
        out << buf;
      }
      out << '\n';
    }
  }

  // Echo the table.
  {
    std::ifstream in(table_path);
    std::cout << in.rdbuf();
  }

  manifest.add_artifact(results_path);
  manifest.add_artifact(table_path);
  manifest.write(fs::path(opt.out));
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------
// Argument wiring
// ---------------------------------------------------------------------------

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Label-distribution age estimation from speaker embeddings"};
  app.require_subcommand(1);

  SynthOptions synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--n", synth.n, "Number of samples")->capture_default_str();
  synth_cmd->add_option("--dim", synth.dim, "Embedding dimension")->capture_default_str();
  synth_cmd->add_option("--ages", synth.ages, "Age range LO:HI")->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "Embedding noise sigma")
      ->capture_default_str();
  synth_cmd->add_option("--age-dist", synth.age_dist, "Age distribution: uniform or twomode")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output dataset file (.csv or .jsonl)")
      ->required();

  TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a model head");
  train_cmd->add_option("--data", train.data, "Training dataset")->required();
  train_cmd->add_option("--method", train.method,
                        "Loss preset: reg, cls, regcls or ldl")
      ->capture_default_str();
  CLI::Option* l1_opt =
      train_cmd->add_option("--lambda1", train.lambda1, "Override KL weight");
  CLI::Option* l2_opt =
      train_cmd->add_option("--lambda2", train.lambda2, "Override L1 weight");
  CLI::Option* l3_opt =
      train_cmd->add_option("--lambda3", train.lambda3, "Override variance weight");
  CLI::Option* sigma_opt =
      train_cmd->add_option("--sigma", train.sigma, "Override target sigma (years)");
  train_cmd->add_option("--grid", train.grid, "Age grid LO:HI")->capture_default_str();
  train_cmd->add_option("--hidden", train.hidden,
                        "Hidden layer widths, comma separated ('none' for linear)")
      ->capture_default_str();
  train_cmd->add_option("--batch-size", train.train.batch_size, "Mini-batch size")
      ->capture_default_str();
  train_cmd->add_option("--lr", train.train.initial_lr, "Initial learning rate")
      ->capture_default_str();
  train_cmd->add_option("--momentum", train.train.momentum, "SGD momentum")
      ->capture_default_str();
  train_cmd->add_option("--decay-factor", train.train.lr_decay_factor,
                        "Plateau decay factor")
      ->capture_default_str();
  train_cmd->add_option("--patience", train.train.patience_epochs,
                        "Epochs without improvement before decaying")
      ->capture_default_str();
  train_cmd->add_option("--min-lr", train.train.min_lr, "Learning rate floor")
      ->capture_default_str();
  train_cmd->add_option("--max-epochs", train.train.max_epochs, "Epoch budget")
      ->capture_default_str();
  train_cmd->add_option("--val-fraction", train.train.validation_fraction,
                        "Validation fraction of the training data")
      ->capture_default_str();
  train_cmd->add_option("--seed", train.train.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--deterministic", train.deterministic,
                        "Keep per-batch reductions in a fixed order")
      ->capture_default_str();
  train_cmd->add_option("--out", train.out, "Output directory")->required();

  EvaluateOptions evaluate_opt;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Score a checkpoint on a dataset");
  eval_cmd->add_option("--model", evaluate_opt.model, "Checkpoint file")->required();
  eval_cmd->add_option("--data", evaluate_opt.data, "Evaluation dataset")->required();
  eval_cmd->add_option("--group-by", evaluate_opt.group_by,
                       "Aggregate clips: none, utterance or speaker")
      ->capture_default_str();
  eval_cmd->add_option("--label", evaluate_opt.label,
                       "Method label for the result row (default: checkpoint label)");
  eval_cmd->add_option("--out", evaluate_opt.out, "Output directory")->required();

  PredictOptions predict_opt;
  CLI::App* predict_cmd = app.add_subcommand("predict", "Write per-sample age predictions");
  predict_cmd->add_option("--model", predict_opt.model, "Checkpoint file")->required();
  predict_cmd->add_option("--data", predict_opt.data, "Input dataset")->required();
  predict_cmd->add_option("--group-by", predict_opt.group_by,
                          "Aggregate clips: none, utterance or speaker")
      ->capture_default_str();
  predict_cmd->add_option("--out", predict_opt.out, "Output CSV file")->required();

  AblateOptions ablate;
  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "Sweep methods or (lambda3, sigma) cells");
  ablate_cmd->add_option("--data", ablate.data, "Dataset")->required();
  ablate_cmd->add_option("--seeds", ablate.seeds, "Comma-separated seeds shared by all cells")
      ->capture_default_str();
  ablate_cmd->add_option("--methods", ablate.methods,
                         "Comma-separated method presets (switches to comparison mode)");
  ablate_cmd->add_option("--cells", ablate.cells,
                         "Comma-separated LAMBDA3:SIGMA cells (lambda1 = lambda2 = 1)")
      ->capture_default_str();
  ablate_cmd->add_option("--test-fraction", ablate.test_fraction,
                         "Speaker-exclusive test fraction")
      ->capture_default_str();
  ablate_cmd->add_option("--grid", ablate.grid, "Age grid LO:HI")->capture_default_str();
  ablate_cmd->add_option("--hidden", ablate.hidden, "Hidden layer widths")
      ->capture_default_str();
  ablate_cmd->add_option("--max-epochs", ablate.max_epochs, "Epoch budget per cell")
      ->capture_default_str();
  ablate_cmd->add_option("--batch-size", ablate.train.batch_size, "Mini-batch size")
      ->capture_default_str();
  ablate_cmd->add_option("--lr", ablate.train.initial_lr, "Initial learning rate")
      ->capture_default_str();
  ablate_cmd->add_option("--val-fraction", ablate.train.validation_fraction,
                         "Validation fraction inside each training split")
      ->capture_default_str();
  ablate_cmd->add_option("--out", ablate.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (train_cmd->parsed()) {
      train.has_l1 = l1_opt->count() > 0;
      train.has_l2 = l2_opt->count() > 0;
      train.has_l3 = l3_opt->count() > 0;
      train.has_sigma = sigma_opt->count() > 0;
      return cmd_train(train);
    }
    if (eval_cmd->parsed()) return cmd_evaluate(evaluate_opt);
    if (predict_cmd->parsed()) return cmd_predict(predict_opt);
    if (ablate_cmd->parsed()) return cmd_ablate(ablate);
  } catch (const TrainingDivergedError& e) {
    std::cerr << "ldlage: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const Error& e) {
    std::cerr << "ldlage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "ldlage: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace ldlage
