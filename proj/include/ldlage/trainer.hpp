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

#ifndef LDLAGE_TRAINER_HPP_
#define LDLAGE_TRAINER_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ldlage/data.hpp"
#include "ldlage/loss.hpp"
#include "ldlage/model.hpp"

namespace ldlage {

/// Mini-batch SGD settings. Defaults follow the reference recipe: batches of
/// 32, learning rate 0.001 with momentum 0.9, halved after two epochs
/// without validation improvement, floored at 1e-5.
struct TrainConfig {
  int batch_size = 32;
  double initial_lr = 1e-3;
  double momentum = 0.9;          // in [0, 1)
  double lr_decay_factor = 0.5;   // in (0, 1)
  int patience_epochs = 2;
  double min_lr = 1e-5;
  int max_epochs = 100;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;  // in (0, 1)
  // The training loop is sequential and bitwise reproducible either way;
  // the flag is part of the configuration surface for callers that script
  // reruns.
  bool deterministic = true;

  void validate() const;
};

enum class StopReason {
  kMaxEpochs,        // epoch budget exhausted
  kPlateauAtMinLr,   // patience ran out with the rate already at min_lr
};

std::string_view to_string(StopReason reason);

struct EpochRecord {
  int epoch = 0;  // 1-based
  LossBreakdown train_mean;
  double validation_total = 0.0;
  double learning_rate = 0.0;  // rate in effect during this epoch
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int final_epoch = 0;
  StopReason stop_reason = StopReason::kMaxEpochs;
};

/// Line-per-epoch CSV: epoch,kl,l1,variance,total,val_total,lr.
void write_train_log(std::ostream& out, const TrainReport& report);

enum class Method { kReg, kCls, kRegCls, kLdl };

/// A named loss preset.
struct MethodConfig {
  std::string name;
  HybridLossConfig loss;
};

/// The four standard configurations:
///   reg     lambda = (0, 1, 0),   sigma 1    (solo regression)
///   cls     lambda = (1, 0, 0),   sigma 0.1  (solo classification)
///   regcls  lambda = (1, 1, 0),   sigma 0.1  (mixture)
///   ldl     lambda = (1, 1, 0.1), sigma 1    (full hybrid)
MethodConfig method_config(Method method);
/// Same, from the lower-case name; throws InvalidParameterError otherwise.
MethodConfig method_config(std::string_view name);

/// Splits into (train, validation). When speaker ids are present no speaker
/// straddles the split; samples without a speaker id count as singleton
/// groups. Deterministic given the seed. Throws InvalidParameterError when
/// either side would be empty.
std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>>
split_train_validation(const std::vector<LabeledSample>& dataset, double fraction,
                       std::uint64_t seed);

/// Reduce-on-plateau learning-rate schedule. observe() consumes one
/// epoch-end validation loss and returns false when training should stop
/// (patience exhausted while the rate is already floored).
class PlateauScheduler {
 public:
  PlateauScheduler(double initial_lr, double decay_factor, int patience_epochs,
                   double min_lr);

  double learning_rate() const { return lr_; }
  bool observe(double validation_loss);

 private:
  double lr_;
  double decay_factor_;
  int patience_epochs_;
  double min_lr_;
  double best_;
  int stale_epochs_ = 0;
};

/// Classical heavy-ball step, applied in a fixed parameter order:
/// v <- momentum * v - lr * grad;  param <- param + v.
void apply_sgd_step(ModelHead& head, const HeadGradients& grads,
                    HeadGradients& velocity, double learning_rate, double momentum);

struct FitResult {
  ModelHead head;
  TrainReport report;
};

/// Trains a copy of `head` on `dataset` with shuffled mini-batches (the last
/// partial batch is kept) and per-sample losses averaged over each batch.
/// Validation uses an internal speaker-exclusive split. Throws
/// TrainingDivergedError when a loss turns non-finite.
FitResult fit(const ModelHead& head, const std::vector<LabeledSample>& dataset,
              const AgeGrid& grid, const MethodConfig& method,
              const TrainConfig& config);

}  // namespace ldlage

#endif  // LDLAGE_TRAINER_HPP_
