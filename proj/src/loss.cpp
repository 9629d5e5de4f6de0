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

#include "ldlage/loss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ldlage/error.hpp"

namespace ldlage {

namespace {

// Softmax outputs are strictly positive in exact arithmetic but can
// underflow; the floor keeps log() finite.
constexpr double kLogFloor = 1e-12;

double sign_or_zero(double x) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return -1.0;
  return 0.0;
}

}  // namespace

void HybridLossConfig::validate() const {
  if (!(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda3 >= 0.0)) {
    throw InvalidParameterError("HybridLossConfig: lambdas must be >= 0");
  }
  if (lambda1 == 0.0 && lambda2 == 0.0 && lambda3 == 0.0) {
    throw InvalidParameterError("HybridLossConfig: at least one lambda must be > 0");
  }
  if (!(sigma > 0.0)) {
    std::ostringstream msg;
    msg << "HybridLossConfig: sigma must be > 0, got " << sigma;
    throw InvalidParameterError(msg.str());
  }
}

double kl_loss(const LabelDistribution& target, const LabelDistribution& predicted) {
  if (!(target.grid() == predicted.grid())) {
    throw InvalidParameterError("kl_loss: target and prediction live on different grids");
  }
  double kl = 0.0;
  for (int i = 0; i < target.size(); ++i) {
    const double y = target[i];
    if (y <= 0.0) continue;  // 0 * log(0 / q) := 0
    kl += y * (std::log(y) - std::log(std::max(predicted[i], kLogFloor)));
  }
  // Non-negative in exact arithmetic; rounding can leave a tiny negative
  // residue when the distributions nearly coincide.
  return std::max(kl, 0.0);
}

double l1_age_loss(double true_age, const LabelDistribution& predicted) {
  return std::abs(expected_age(predicted) - true_age);
}

double variance_loss(const LabelDistribution& predicted) {
  return distribution_variance(predicted);
}

LossBreakdown hybrid_loss(const HybridLossConfig& config, double true_age,
                          std::span<const double> logits, const AgeGrid& grid) {
  config.validate();
  const LabelDistribution target =
      discretize_gaussian({.true_age = true_age, .sigma = config.sigma}, grid);
  return hybrid_loss_with_target(config, target, true_age, logits);
}

LossBreakdown hybrid_loss_with_target(const HybridLossConfig& config,
                                      const LabelDistribution& target,
                                      double true_age,
                                      std::span<const double> logits) {
  if (static_cast<int>(logits.size()) != target.size()) {
    throw InvalidParameterError(
        "hybrid_loss: got " + std::to_string(logits.size()) +
        " logits for a grid of size " + std::to_string(target.size()));
  }
  const LabelDistribution predicted = softmax_distribution(target.grid(), logits);
  LossBreakdown out;
  out.kl = kl_loss(target, predicted);
  out.l1 = l1_age_loss(true_age, predicted);
  out.variance = variance_loss(predicted);
  out.total = config.lambda1 * out.kl + config.lambda2 * out.l1 +
              config.lambda3 * out.variance;
  return out;
}

std::vector<double> hybrid_loss_gradient(const HybridLossConfig& config,
                                         double true_age,
                                         std::span<const double> logits,
                                         const AgeGrid& grid) {
  config.validate();
  const LabelDistribution target =
      discretize_gaussian({.true_age = true_age, .sigma = config.sigma}, grid);
  std::vector<double> grad;
  hybrid_loss_gradient_with_target(config, target, true_age, logits, grad);
  return grad;
}

void hybrid_loss_gradient_with_target(const HybridLossConfig& config,
                                      const LabelDistribution& target,
                                      double true_age,
                                      std::span<const double> logits,
                                      std::vector<double>& grad_out) {
  const int k = target.size();
  if (static_cast<int>(logits.size()) != k) {
    throw InvalidParameterError(
        "hybrid_loss_gradient: got " + std::to_string(logits.size()) +
        " logits for a grid of size " + std::to_string(k));
  }
  const AgeGrid& grid = target.grid();
  const std::vector<double> p = softmax(logits);

  double mean = 0.0;
  for (int i = 0; i < k; ++i) {
    mean += grid.age(i) * p[static_cast<std::size_t>(i)];
  }
  double variance = 0.0;
  for (int i = 0; i < k; ++i) {
    const double delta = grid.age(i) - mean;
    variance += p[static_cast<std::size_t>(i)] * delta * delta;
  }

  const double l1_sign = sign_or_zero(mean - true_age);

  grad_out.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const std::size_t u = static_cast<std::size_t>(i);
    const double delta = grid.age(i) - mean;
    double g = config.lambda1 * (p[u] - target[i]);
    g += config.lambda2 * l1_sign * p[u] * delta;
    // Both appearances of the mean inside the variance are differentiated;
    // the chain collapses to p * ((a - m)^2 - v).
    g += config.lambda3 * p[u] * (delta * delta - variance);
    grad_out[u] = g;
  }
}

}  // namespace ldlage
