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

#ifndef LDLAGE_GRID_HPP_
#define LDLAGE_GRID_HPP_

#include <span>
#include <vector>

namespace ldlage {

/// The ordered set of integer candidate ages [min_age, max_age].
/// Index i in [0, K-1] maps bijectively to age min_age + i.
class AgeGrid {
 public:
  /// Requires min_age >= 1 and at least two labels; throws
  /// InvalidParameterError otherwise.
  AgeGrid(int min_age, int max_age);

  int min_age() const { return min_age_; }
  int max_age() const { return max_age_; }

  /// Number of labels K.
  int size() const { return max_age_ - min_age_ + 1; }

  /// Age carried by index i (unchecked).
  double age(int index) const { return static_cast<double>(min_age_ + index); }

  /// Index of the grid age nearest to the (possibly off-grid) age.
  int nearest_index(double age) const;

  bool contains(double age) const {
    return age >= min_age_ && age <= max_age_;
  }

  friend bool operator==(const AgeGrid&, const AgeGrid&) = default;

 private:
  int min_age_;
  int max_age_;
};

/// A probability vector over an AgeGrid. Entries must lie in [0, 1] and sum
/// to one within 1e-9; both are checked at construction and never silently
/// repaired.
class LabelDistribution {
 public:
  LabelDistribution(const AgeGrid& grid, std::vector<double> probs);

  static LabelDistribution uniform(const AgeGrid& grid);
  /// Probability one on the label carrying `age` (must be on the grid).
  static LabelDistribution one_hot(const AgeGrid& grid, int age);

  const AgeGrid& grid() const { return grid_; }
  std::span<const double> probs() const { return probs_; }
  double operator[](int index) const {
    return probs_[static_cast<std::size_t>(index)];
  }
  int size() const { return grid_.size(); }

 private:
  AgeGrid grid_;
  std::vector<double> probs_;
};

/// Centre and width of a discretized Gaussian target distribution.
struct GaussianTargetSpec {
  double true_age = 0.0;  // years; may be fractional and may lie off-grid
  double sigma = 1.0;     // years; must be > 0
};

/// Evaluates the Gaussian density exp(-(age_k - t)^2 / (2 sigma^2)) at every
/// grid age and renormalizes to a probability vector. Exponents are shifted
/// by their maximum before exponentiation, so arbitrarily small sigma stays
/// finite. A true age outside the grid concentrates mass at the boundary and
/// raises a warning (see warn()), not an error.
LabelDistribution discretize_gaussian(const GaussianTargetSpec& spec,
                                      const AgeGrid& grid);

/// Mean age of a distribution: sum_k age(k) * p_k, clamped into
/// [min_age, max_age] against rounding.
double expected_age(const LabelDistribution& dist);

/// Variance of a distribution: sum_k p_k * (age(k) - mean)^2.
double distribution_variance(const LabelDistribution& dist);

/// Numerically stable softmax (shift by the maximum logit).
std::vector<double> softmax(std::span<const double> logits);

/// softmax(logits) packaged as a LabelDistribution over `grid`.
/// Logit count must equal grid.size().
LabelDistribution softmax_distribution(const AgeGrid& grid,
                                       std::span<const double> logits);

}  // namespace ldlage

#endif  // LDLAGE_GRID_HPP_
