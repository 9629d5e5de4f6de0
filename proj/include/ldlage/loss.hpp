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

#ifndef LDLAGE_LOSS_HPP_
#define LDLAGE_LOSS_HPP_

#include <span>
#include <vector>

#include "ldlage/grid.hpp"

namespace ldlage {

/// Weights and target width of the hybrid objective
///   total = lambda1 * KL + lambda2 * L1 + lambda3 * variance.
/// All lambdas must be >= 0, at least one > 0, and sigma > 0.
struct HybridLossConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda3 = 0.1;
  double sigma = 1.0;

  /// Throws InvalidParameterError when a field is out of range.
  void validate() const;
};

/// Per-sample loss values. `total` is exactly the lambda-weighted sum of the
/// three components.
struct LossBreakdown {
  double kl = 0.0;        // nats
  double l1 = 0.0;        // years
  double variance = 0.0;  // years^2
  double total = 0.0;
};

/// Forward KL divergence sum_k target_k * log(target_k / predicted_k).
/// Zero target entries contribute nothing; predicted entries are floored at
/// 1e-12 inside the log. Both distributions must share one grid. With a
/// one-hot target this reduces to the cross-entropy -log predicted_t.
double kl_loss(const LabelDistribution& target, const LabelDistribution& predicted);

/// Absolute error between the distribution mean and the ground-truth age.
double l1_age_loss(double true_age, const LabelDistribution& predicted);

/// Dispersion penalty: the variance of the predicted distribution.
double variance_loss(const LabelDistribution& predicted);

/// Full objective at a logit vector: predicted = softmax(logits), target =
/// discretize_gaussian(true_age, config.sigma). Logit count must equal
/// grid.size().
LossBreakdown hybrid_loss(const HybridLossConfig& config, double true_age,
                          std::span<const double> logits, const AgeGrid& grid);

/// d total / d logits, computed analytically. With p = softmax(logits),
/// y the target, a the age vector, m = sum_k a_k p_k and
/// v = sum_k p_k (a_k - m)^2:
///   d/dz_k = lambda1 * (p_k - y_k)
///          + lambda2 * sign(m - t) * p_k * (a_k - m)
///          + lambda3 * p_k * ((a_k - m)^2 - v).
/// The L1 subgradient at m == t is taken as 0.
std::vector<double> hybrid_loss_gradient(const HybridLossConfig& config,
                                         double true_age,
                                         std::span<const double> logits,
                                         const AgeGrid& grid);

/// Variants for callers that hold a precomputed target (the training loop
/// caches one target per sample). Behaviour is identical to hybrid_loss /
/// hybrid_loss_gradient with target = discretize_gaussian(true_age, sigma).
LossBreakdown hybrid_loss_with_target(const HybridLossConfig& config,
                                      const LabelDistribution& target,
                                      double true_age,
                                      std::span<const double> logits);

/// Writes the gradient into `grad_out` (resized to the logit count).
void hybrid_loss_gradient_with_target(const HybridLossConfig& config,
                                      const LabelDistribution& target,
                                      double true_age,
                                      std::span<const double> logits,
                                      std::vector<double>& grad_out);

}  // namespace ldlage

#endif  // LDLAGE_LOSS_HPP_
