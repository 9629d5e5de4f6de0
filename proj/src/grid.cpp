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

#include "ldlage/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ldlage/error.hpp"

namespace ldlage {

namespace {

constexpr double kSumTolerance = 1e-9;

}  // namespace

AgeGrid::AgeGrid(int min_age, int max_age) : min_age_(min_age), max_age_(max_age) {
  if (min_age < 1) {
    throw InvalidParameterError("AgeGrid: min_age must be >= 1, got " +
                                std::to_string(min_age));
  }
  if (max_age < min_age) {
    throw InvalidParameterError("AgeGrid: max_age " + std::to_string(max_age) +
                                " < min_age " + std::to_string(min_age));
  }
  if (size() < 2) {
    throw InvalidParameterError("AgeGrid: needs at least 2 labels, got " +
                                std::to_string(size()));
  }
}

int AgeGrid::nearest_index(double age) const {
  const double clamped = std::clamp(age, static_cast<double>(min_age_),
                                    static_cast<double>(max_age_));
  return static_cast<int>(std::lround(clamped)) - min_age_;
}

LabelDistribution::LabelDistribution(const AgeGrid& grid, std::vector<double> probs)
    : grid_(grid), probs_(std::move(probs)) {
  if (static_cast<int>(probs_.size()) != grid_.size()) {
    throw InvalidParameterError(
        "LabelDistribution: expected " + std::to_string(grid_.size()) +
        " probabilities, got " + std::to_string(probs_.size()));
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << "LabelDistribution: entry " << p << " outside [0, 1]";
      throw InvalidParameterError(msg.str());
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg << "LabelDistribution: probabilities sum to " << sum
        << ", expected 1 within " << kSumTolerance;
    throw InvalidParameterError(msg.str());
  }
}

LabelDistribution LabelDistribution::uniform(const AgeGrid& grid) {
  const int k = grid.size();
  return LabelDistribution(grid, std::vector<double>(k, 1.0 / k));
}

LabelDistribution LabelDistribution::one_hot(const AgeGrid& grid, int age) {
  if (age < grid.min_age() || age > grid.max_age()) {
    throw InvalidParameterError("one_hot: age " + std::to_string(age) +
                                " not on grid [" + std::to_string(grid.min_age()) +
                                ", " + std::to_string(grid.max_age()) + "]");
  }
  std::vector<double> probs(grid.size(), 0.0);
  probs[static_cast<std::size_t>(age - grid.min_age())] = 1.0;
  return LabelDistribution(grid, std::move(probs));
}

LabelDistribution discretize_gaussian(const GaussianTargetSpec& spec,
                                      const AgeGrid& grid) {
  if (!(spec.sigma > 0.0)) {
    std::ostringstream msg;
    msg << "discretize_gaussian: sigma must be > 0, got " << spec.sigma;
    throw InvalidParameterError(msg.str());
  }
  if (!std::isfinite(spec.true_age)) {
    throw InvalidParameterError("discretize_gaussian: true_age is not finite");
  }
  if (!grid.contains(spec.true_age)) {
    std::ostringstream msg;
    msg << "discretize_gaussian: true age " << spec.true_age
        << " lies outside the grid [" << grid.min_age() << ", " << grid.max_age()
        << "]; mass concentrates at the boundary";
    warn(msg.str());
  }

  const int k = grid.size();
  const double inv_two_sigma_sq = 1.0 / (2.0 * spec.sigma * spec.sigma);

  // Log-space evaluation shifted by the maximum exponent; renormalization
  // absorbs the shift, so no entry is clamped afterwards.
  std::vector<double> exponents(static_cast<std::size_t>(k));
  double max_exponent = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    const double delta = grid.age(i) - spec.true_age;
    exponents[static_cast<std::size_t>(i)] = -delta * delta * inv_two_sigma_sq;
    max_exponent = std::max(max_exponent, exponents[static_cast<std::size_t>(i)]);
  }

  std::vector<double> probs(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    const double w = std::exp(exponents[static_cast<std::size_t>(i)] - max_exponent);
    probs[static_cast<std::size_t>(i)] = w;
    sum += w;
  }
  for (double& p : probs) {
    p /= sum;
  }
  return LabelDistribution(grid, std::move(probs));
}

double expected_age(const LabelDistribution& dist) {
  const AgeGrid& grid = dist.grid();
  double mean = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    mean += grid.age(i) * dist[i];
  }
  return std::clamp(mean, static_cast<double>(grid.min_age()),
                    static_cast<double>(grid.max_age()));
}

double distribution_variance(const LabelDistribution& dist) {
  const AgeGrid& grid = dist.grid();
  const double mean = expected_age(dist);
  double variance = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double delta = grid.age(i) - mean;
    variance += dist[i] * delta * delta;
  }
  return variance;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) {
    throw InvalidParameterError("softmax: empty logit vector");
  }
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - max_logit);
    sum += probs[i];
  }
  for (double& p : probs) {
    p /= sum;
  }
  return probs;
}

LabelDistribution softmax_distribution(const AgeGrid& grid,
                                       std::span<const double> logits) {
  if (static_cast<int>(logits.size()) != grid.size()) {
    throw InvalidParameterError(
        "softmax_distribution: got " + std::to_string(logits.size()) +
        " logits for a grid of size " + std::to_string(grid.size()));
  }
  return LabelDistribution(grid, softmax(logits));
}

}  // namespace ldlage
