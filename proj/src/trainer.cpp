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

#include "ldlage/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "ldlage/error.hpp"
#include "ldlage/rng.hpp"

namespace ldlage {

namespace {

void append_real(std::string& out, double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  out += buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) {
    throw InvalidParameterError("TrainConfig: batch_size must be >= 1");
  }
  if (!(initial_lr > 0.0)) {
    throw InvalidParameterError("TrainConfig: initial_lr must be > 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw InvalidParameterError("TrainConfig: momentum must lie in [0, 1)");
  }
  if (!(lr_decay_factor > 0.0 && lr_decay_factor < 1.0)) {
    throw InvalidParameterError("TrainConfig: lr_decay_factor must lie in (0, 1)");
  }
  if (patience_epochs < 1) {
    throw InvalidParameterError("TrainConfig: patience_epochs must be >= 1");
  }
  if (!(min_lr > 0.0) || min_lr > initial_lr) {
    throw InvalidParameterError("TrainConfig: need 0 < min_lr <= initial_lr");
  }
  if (max_epochs < 1) {
    throw InvalidParameterError("TrainConfig: max_epochs must be >= 1");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw InvalidParameterError("TrainConfig: validation_fraction must lie in (0, 1)");
  }
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kMaxEpochs:
      return "max_epochs";
    case StopReason::kPlateauAtMinLr:
      return "plateau_at_min_lr";
  }
  return "unknown";
}

void write_train_log(std::ostream& out, const TrainReport& report) {
  out << "epoch,kl,l1,variance,total,val_total,lr\n";
  std::string row;
  for (const EpochRecord& record : report.epochs) {
    row.clear();
    row += std::to_string(record.epoch);
    row += ',';
    append_real(row, record.train_mean.kl);
    row += ',';
    append_real(row, record.train_mean.l1);
    row += ',';
    append_real(row, record.train_mean.variance);
    row += ',';
    append_real(row, record.train_mean.total);
    row += ',';
    append_real(row, record.validation_total);
    row += ',';
    append_real(row, record.learning_rate);
    row += '\n';
    out << row;
  }
}

MethodConfig method_config(Method method) {
  switch (method) {
    case Method::kReg:
      return {"reg", {.lambda1 = 0.0, .lambda2 = 1.0, .lambda3 = 0.0, .sigma = 1.0}};
    case Method::kCls:
      return {"cls", {.lambda1 = 1.0, .lambda2 = 0.0, .lambda3 = 0.0, .sigma = 0.1}};
    case Method::kRegCls:
      return {"regcls", {.lambda1 = 1.0, .lambda2 = 1.0, .lambda3 = 0.0, .sigma = 0.1}};
    case Method::kLdl:
      return {"ldl", {.lambda1 = 1.0, .lambda2 = 1.0, .lambda3 = 0.1, .sigma = 1.0}};
  }
  throw InvalidParameterError("method_config: unknown method");
}

MethodConfig method_config(std::string_view name) {
  if (name == "reg") return method_config(Method::kReg);
  if (name == "cls") return method_config(Method::kCls);
  if (name == "regcls") return method_config(Method::kRegCls);
  if (name == "ldl") return method_config(Method::kLdl);
  throw InvalidParameterError("method_config: unknown method '" + std::string(name) +
                              "' (expected reg, cls, regcls or ldl)");
}

std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>>
split_train_validation(const std::vector<LabeledSample>& dataset, double fraction,
                       std::uint64_t seed) {
  if (dataset.empty()) {
    throw InvalidParameterError("split_train_validation: dataset is empty");
  }
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidParameterError("split_train_validation: fraction must lie in (0, 1)");
  }

  // Group indices by speaker; samples without an id are singleton groups.
  // Group order follows first appearance so the shuffle is reproducible.
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const std::string& speaker = dataset[i].speaker_id;
    if (speaker.empty()) {
      groups.push_back({i});
      continue;
    }
    auto [it, inserted] = group_of.try_emplace(speaker, groups.size());
    if (inserted) {
      groups.push_back({i});
    } else {
      groups[it->second].push_back(i);
    }
  }

  std::vector<std::size_t> order(groups.size());
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
  Rng rng(derive_seed(seed, 0x5eed));
  rng.shuffle(order);

  const auto target =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(dataset.size())));
  if (target == 0) {
    throw InvalidParameterError(
        "split_train_validation: dataset too small for a non-empty validation set");
  }

  std::vector<bool> in_validation(dataset.size(), false);
  std::size_t assigned = 0;
  for (std::size_t g : order) {
    if (assigned >= target) break;
    for (std::size_t i : groups[g]) {
      in_validation[i] = true;
    }
    assigned += groups[g].size();
  }
  if (assigned == dataset.size()) {
    throw InvalidParameterError(
        "split_train_validation: split leaves no training samples");
  }

  std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> result;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (in_validation[i] ? result.second : result.first).push_back(dataset[i]);
  }
  return result;
}

PlateauScheduler::PlateauScheduler(double initial_lr, double decay_factor,
                                   int patience_epochs, double min_lr)
    : lr_(initial_lr),
      decay_factor_(decay_factor),
      patience_epochs_(patience_epochs),
      min_lr_(min_lr),
      best_(std::numeric_limits<double>::infinity()) {}

bool PlateauScheduler::observe(double validation_loss) {
  if (validation_loss < best_) {  // any strict improvement resets patience
    best_ = validation_loss;
    stale_epochs_ = 0;
    return true;
  }
  if (++stale_epochs_ < patience_epochs_) {
    return true;
  }
  stale_epochs_ = 0;
  if (lr_ <= min_lr_) {
    return false;
  }
  lr_ = std::max(lr_ * decay_factor_, min_lr_);
  return true;
}

void apply_sgd_step(ModelHead& head, const HeadGradients& grads,
                    HeadGradients& velocity, double learning_rate, double momentum) {
  if (grads.weight.size() != head.layers.size() ||
      velocity.weight.size() != head.layers.size()) {
    throw InvalidStateError("apply_sgd_step: gradient shapes do not match the head");
  }
  for (std::size_t l = 0; l < head.layers.size(); ++l) {
    Layer& layer = head.layers[l];
    auto w = layer.weight.data();
    auto g = grads.weight[l].data();
    auto v = velocity.weight[l].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = momentum * v[i] - learning_rate * g[i];
      w[i] += v[i];
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      velocity.bias[l][i] = momentum * velocity.bias[l][i] -
                            learning_rate * grads.bias[l][i];
      layer.bias[i] += velocity.bias[l][i];
    }
  }
}

FitResult fit(const ModelHead& head, const std::vector<LabeledSample>& dataset,
              const AgeGrid& grid, const MethodConfig& method,
              const TrainConfig& config) {
  config.validate();
  method.loss.validate();
  if (dataset.empty()) {
    throw InvalidParameterError("fit: dataset is empty");
  }
  if (head.layers.empty() || head.output_dim() != grid.size()) {
    throw InvalidParameterError("fit: head output width does not match the grid");
  }
  for (const LabeledSample& sample : dataset) {
    if (static_cast<int>(sample.embedding.size()) != head.input_dim()) {
      throw InvalidParameterError("fit: sample '" + sample.id +
                                  "' does not match the head input dimension");
    }
  }

  auto [train_set, val_set] =
      split_train_validation(dataset, config.validation_fraction, config.seed);

  // One target per sample, computed once. Out-of-grid ages warn here.
  const auto make_targets = [&](const std::vector<LabeledSample>& samples) {
    std::vector<LabelDistribution> targets;
    targets.reserve(samples.size());
    for (const LabeledSample& sample : samples) {
      targets.push_back(
          discretize_gaussian({.true_age = sample.age, .sigma = method.loss.sigma}, grid));
    }
    return targets;
  };
  const std::vector<LabelDistribution> train_targets = make_targets(train_set);
  const std::vector<LabelDistribution> val_targets = make_targets(val_set);

  FitResult result{.head = head, .report = {}};
  HeadGradients grads = HeadGradients::zeros_like(head);
  HeadGradients velocity = HeadGradients::zeros_like(head);
  PlateauScheduler scheduler(config.initial_lr, config.lr_decay_factor,
                             config.patience_epochs, config.min_lr);

  std::vector<std::size_t> perm(train_set.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;

  ForwardTrace trace;
  std::vector<double> dlogits;

  result.report.stop_reason = StopReason::kMaxEpochs;
  result.report.final_epoch = config.max_epochs;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double lr = scheduler.learning_rate();
    Rng shuffle_rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(perm);

    LossBreakdown epoch_sum;
    const std::size_t n_train = train_set.size();
    const auto batch_count = static_cast<int>(
        (n_train + static_cast<std::size_t>(config.batch_size) - 1) /
        static_cast<std::size_t>(config.batch_size));
    for (int batch = 0; batch < batch_count; ++batch) {
      const std::size_t begin = static_cast<std::size_t>(batch) *
                                static_cast<std::size_t>(config.batch_size);
      const std::size_t end =
          std::min(begin + static_cast<std::size_t>(config.batch_size), n_train);
      grads.set_zero();
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t idx = perm[i];
        const LabeledSample& sample = train_set[idx];
        const std::vector<double> logits = forward(result.head, sample.embedding, &trace);
        const LossBreakdown loss = hybrid_loss_with_target(
            method.loss, train_targets[idx], sample.age, logits);
        if (!std::isfinite(loss.total)) {
          throw TrainingDivergedError(
              "fit: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                  std::to_string(batch + 1),
              epoch, batch + 1);
        }
        epoch_sum.kl += loss.kl;
        epoch_sum.l1 += loss.l1;
        epoch_sum.variance += loss.variance;
        epoch_sum.total += loss.total;
        hybrid_loss_gradient_with_target(method.loss, train_targets[idx], sample.age,
                                         logits, dlogits);
        backward_accumulate(result.head, trace, dlogits, grads);
      }
      grads.scale(1.0 / static_cast<double>(end - begin));
      apply_sgd_step(result.head, grads, velocity, lr, config.momentum);
    }

    double val_total = 0.0;
    for (std::size_t i = 0; i < val_set.size(); ++i) {
      const std::vector<double> logits = forward(result.head, val_set[i].embedding);
      val_total +=
          hybrid_loss_with_target(method.loss, val_targets[i], val_set[i].age, logits)
              .total;
    }
    val_total /= static_cast<double>(val_set.size());
    if (!std::isfinite(val_total)) {
      throw TrainingDivergedError(
          "fit: non-finite validation loss after epoch " + std::to_string(epoch),
          epoch, batch_count);
    }

    EpochRecord record;
    record.epoch = epoch;
    const double inv_n = 1.0 / static_cast<double>(n_train);
    record.train_mean = {.kl = epoch_sum.kl * inv_n,
                         .l1 = epoch_sum.l1 * inv_n,
                         .variance = epoch_sum.variance * inv_n,
                         .total = epoch_sum.total * inv_n};
    record.validation_total = val_total;
    record.learning_rate = lr;
    result.report.epochs.push_back(record);

    if (!scheduler.observe(val_total)) {
      result.report.stop_reason = StopReason::kPlateauAtMinLr;
      result.report.final_epoch = epoch;
      break;
    }
  }
  if (result.report.stop_reason == StopReason::kMaxEpochs) {
    result.report.final_epoch = config.max_epochs;
  }
  return result;
}

}  // namespace ldlage
