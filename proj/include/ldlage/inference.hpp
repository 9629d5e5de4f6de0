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

#ifndef LDLAGE_INFERENCE_HPP_
#define LDLAGE_INFERENCE_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ldlage/grid.hpp"
#include "ldlage/model.hpp"

namespace ldlage {

/// Prediction for one clip: the softmax distribution, its mean age as the
/// point estimate, and an aggregation weight (1 unless the caller knows
/// better, e.g. clip durations).
struct ClipPrediction {
  LabelDistribution distribution;
  double point_estimate = 0.0;  // years
  double weight = 1.0;
};

/// Runs the head and converts the logits to a distribution plus its mean.
ClipPrediction predict_clip(const ModelHead& head, std::span<const double> embedding,
                            const AgeGrid& grid);

/// Weighted mean of clip point estimates. Throws InvalidParameterError for
/// an empty list, a negative weight, or all-zero weights.
double predict_utterance(std::span<const ClipPrediction> clips);

/// One scored example.
struct AgePair {
  double truth = 0.0;
  double predicted = 0.0;
};

struct EvalResult {
  double mae = 0.0;
  /// Sample Pearson correlation (1/(N-1) convention). Empty when n < 2 or
  /// either side has zero variance.
  std::optional<double> pearson;
  std::size_t n = 0;
};

/// MAE and Pearson correlation over (truth, prediction) pairs. The list must
/// be non-empty; MAE is always computed, the correlation only when defined.
EvalResult evaluate(std::span<const AgePair> pairs);

/// Character-separated summary row "method,mae,pearson,n" (pearson prints
/// as "nan" when undefined).
std::string format_eval_row(std::string_view method, const EvalResult& result);

}  // namespace ldlage

#endif  // LDLAGE_INFERENCE_HPP_
