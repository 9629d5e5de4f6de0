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

#include "ldlage/inference.hpp"

#include <cmath>
#include <cstdio>

#include "ldlage/error.hpp"

namespace ldlage {

ClipPrediction predict_clip(const ModelHead& head, std::span<const double> embedding,
                            const AgeGrid& grid) {
  if (head.output_dim() != grid.size()) {
    throw InvalidParameterError("predict_clip: head output width does not match the grid");
  }
  const std::vector<double> logits = forward(head, embedding);
  LabelDistribution distribution = softmax_distribution(grid, logits);
  const double estimate = expected_age(distribution);
  return ClipPrediction{.distribution = std::move(distribution),
                        .point_estimate = estimate,
                        .weight = 1.0};
}

double predict_utterance(std::span<const ClipPrediction> clips) {
  if (clips.empty()) {
    throw InvalidParameterError("predict_utterance: no clips");
  }
  double weighted_sum = 0.0;
  double total_weight = 0.0;
  for (const ClipPrediction& clip : clips) {
    if (!(clip.weight >= 0.0)) {
      throw InvalidParameterError("predict_utterance: negative clip weight");
    }
    weighted_sum += clip.weight * clip.point_estimate;
    total_weight += clip.weight;
  }
  if (total_weight <= 0.0) {
    throw InvalidParameterError("predict_utterance: total clip weight is zero");
  }
  return weighted_sum / total_weight;
}

EvalResult evaluate(std::span<const AgePair> pairs) {
  if (pairs.empty()) {
    throw InvalidParameterError("evaluate: no pairs");
  }
  const auto n = static_cast<double>(pairs.size());

  EvalResult result;
  result.n = pairs.size();
  double abs_error_sum = 0.0;
  double truth_mean = 0.0;
  double pred_mean = 0.0;
  for (const AgePair& pair : pairs) {
    abs_error_sum += std::abs(pair.predicted - pair.truth);
    truth_mean += pair.truth;
    pred_mean += pair.predicted;
  }
  result.mae = abs_error_sum / n;

  if (pairs.size() < 2) {
    return result;  // correlation undefined
  }
  truth_mean /= n;
  pred_mean /= n;

  double truth_ss = 0.0;
  double pred_ss = 0.0;
  for (const AgePair& pair : pairs) {
    truth_ss += (pair.truth - truth_mean) * (pair.truth - truth_mean);
    pred_ss += (pair.predicted - pred_mean) * (pair.predicted - pred_mean);
  }
  const double truth_sd = std::sqrt(truth_ss / (n - 1.0));
  const double pred_sd = std::sqrt(pred_ss / (n - 1.0));
  if (truth_sd == 0.0 || pred_sd == 0.0) {
    return result;  // correlation undefined
  }

  double rho = 0.0;
  for (const AgePair& pair : pairs) {
    rho += ((pair.predicted - pred_mean) / pred_sd) *
           ((pair.truth - truth_mean) / truth_sd);
  }
  result.pearson = rho / (n - 1.0);
  return result;
}

std::string format_eval_row(std::string_view method, const EvalResult& result) {
  char buf[128];
  if (result.pearson.has_value()) {
    std::snprintf(buf, sizeof(buf), "%.*s,%.9g,%.9g,%zu",
                  static_cast<int>(method.size()), method.data(), result.mae,
                  *result.pearson, result.n);
  } else {
    std::snprintf(buf, sizeof(buf), "%.*s,%.9g,nan,%zu",
                  static_cast<int>(method.size()), method.data(), result.mae,
                  result.n);
  }
  return buf;
}

}  // namespace ldlage
