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

// Independent reference implementations used only by tests. Everything here
// is written against the raw mathematical definitions, deliberately not
// sharing code with the library paths under test.

#ifndef LDLAGE_TESTS_ORACLES_HPP_
#define LDLAGE_TESTS_ORACLES_HPP_

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace oracle {

/// Central finite difference d f / d x_i at step h, evaluated by mutating a
/// copy of x.
inline double central_difference(const std::function<double(std::span<const double>)>& f,
                                 std::vector<double> x, std::size_t i, double h) {
  const double original = x[i];
  x[i] = original + h;
  const double upper = f(x);
  x[i] = original - h;
  const double lower = f(x);
  return (upper - lower) / (2.0 * h);
}

/// Gradient-check discrepancy: |a - b| / max(|a|, |b|, floor). The floor
/// turns the comparison absolute where both sides are tiny, which is where
/// central differences are dominated by f's rounding noise.
inline double relative_error(double a, double b, double floor = 1e-2) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Plain-definition mean absolute error.
inline double brute_force_mae(std::span<const double> truths,
                              std::span<const double> predictions) {
  double sum = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    sum += std::abs(predictions[i] - truths[i]);
  }
  return sum / static_cast<double>(truths.size());
}

/// Pearson correlation with sample (N-1) normalization, straight from the
/// textbook formula. Empty when undefined.
inline std::optional<double> brute_force_pearson(std::span<const double> truths,
                                                 std::span<const double> predictions) {
  const std::size_t n = truths.size();
  if (n < 2) return std::nullopt;
  double mu_t = 0.0;
  double mu_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mu_t += truths[i];
    mu_y += predictions[i];
  }
  mu_t /= static_cast<double>(n);
  mu_y /= static_cast<double>(n);
  double ss_t = 0.0;
  double ss_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ss_t += (truths[i] - mu_t) * (truths[i] - mu_t);
    ss_y += (predictions[i] - mu_y) * (predictions[i] - mu_y);
  }
  const double sd_t = std::sqrt(ss_t / static_cast<double>(n - 1));
  const double sd_y = std::sqrt(ss_y / static_cast<double>(n - 1));
  if (sd_t == 0.0 || sd_y == 0.0) return std::nullopt;
  double rho = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rho += ((predictions[i] - mu_y) / sd_y) * ((truths[i] - mu_t) / sd_t);
  }
  return rho / static_cast<double>(n - 1);
}

/// Ordinary least squares fit of y against [x, 1] by normal equations with
/// Gaussian elimination (partial pivoting). Returns d+1 coefficients.
inline std::vector<double> least_squares_probe(
    const std::vector<std::vector<double>>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  const std::size_t d = xs.front().size() + 1;  // + intercept
  std::vector<std::vector<double>> ata(d, std::vector<double>(d, 0.0));
  std::vector<double> aty(d, 0.0);
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j + 1 < d; ++j) row[j] = xs[i][j];
    row[d - 1] = 1.0;
    for (std::size_t r = 0; r < d; ++r) {
      aty[r] += row[r] * ys[i];
      for (std::size_t c = 0; c < d; ++c) {
        ata[r][c] += row[r] * row[c];
      }
    }
  }
  // Tiny ridge keeps the system solvable when features are collinear.
  for (std::size_t r = 0; r < d; ++r) ata[r][r] += 1e-9;

  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < d; ++r) {
      if (std::abs(ata[r][col]) > std::abs(ata[pivot][col])) pivot = r;
    }
    std::swap(ata[col], ata[pivot]);
    std::swap(aty[col], aty[pivot]);
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col) continue;
      const double factor = ata[r][col] / ata[col][col];
      for (std::size_t c = col; c < d; ++c) {
        ata[r][c] -= factor * ata[col][c];
      }
      aty[r] -= factor * aty[col];
    }
  }
  std::vector<double> coef(d);
  for (std::size_t r = 0; r < d; ++r) {
    coef[r] = aty[r] / ata[r][r];
  }
  return coef;
}

inline double probe_predict(std::span<const double> coef, std::span<const double> x) {
  double y = coef[coef.size() - 1];
  for (std::size_t j = 0; j + 1 < coef.size(); ++j) {
    y += coef[j] * x[j];
  }
  return y;
}

}  // namespace oracle

#endif  // LDLAGE_TESTS_ORACLES_HPP_
