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

#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "ldlage/error.hpp"
#include "ldlage/rng.hpp"

using namespace ldlage;

TEST_CASE("age grid validates its bounds") {
  CHECK_THROWS_AS(AgeGrid(0, 10), InvalidParameterError);
  CHECK_THROWS_AS(AgeGrid(-3, 10), InvalidParameterError);
  CHECK_THROWS_AS(AgeGrid(10, 9), InvalidParameterError);
  CHECK_THROWS_AS(AgeGrid(5, 5), InvalidParameterError);  // K must be >= 2

  const AgeGrid grid(18, 80);
  CHECK(grid.size() == 63);
  CHECK(grid.age(0) == 18.0);
  CHECK(grid.age(62) == 80.0);
  CHECK(grid.nearest_index(17.2) == 0);
  CHECK(grid.nearest_index(42.49) == 42 - 18);
  CHECK(grid.nearest_index(95.0) == 62);
}

TEST_CASE("label distribution enforces its invariants") {
  const AgeGrid grid(1, 3);
  CHECK_THROWS_AS(LabelDistribution(grid, {0.5, 0.5}), InvalidParameterError);
  CHECK_THROWS_AS(LabelDistribution(grid, {0.5, 0.6, 0.1}), InvalidParameterError);
  CHECK_THROWS_AS(LabelDistribution(grid, {-0.1, 0.6, 0.5}), InvalidParameterError);
  CHECK_NOTHROW(LabelDistribution(grid, {0.2, 0.3, 0.5}));
  CHECK_THROWS_AS(LabelDistribution::one_hot(grid, 7), InvalidParameterError);
}

TEST_CASE("discretized gaussian matches direct evaluation") {
  // t=2, sigma=1 on {1,2,3}: weights e^{-1/2}, 1, e^{-1/2} renormalized.
  const AgeGrid grid(1, 3);
  const LabelDistribution dist = discretize_gaussian({.true_age = 2.0, .sigma = 1.0}, grid);
  const double w = std::exp(-0.5);
  const double expected_side = w / (1.0 + 2.0 * w);
  CHECK(dist[0] == doctest::Approx(expected_side).epsilon(1e-12));
  CHECK(dist[1] == doctest::Approx(1.0 / (1.0 + 2.0 * w)).epsilon(1e-12));
  CHECK(dist[0] == doctest::Approx(0.274069).epsilon(1e-5));
  CHECK(dist[1] == doctest::Approx(0.451863).epsilon(1e-5));
  CHECK(dist[0] == dist[2]);  // symmetric about t
}

TEST_CASE("small sigma concentrates on the true age") {
  const AgeGrid grid(1, 10);
  const LabelDistribution dist = discretize_gaussian({.true_age = 5.0, .sigma = 0.1}, grid);
  for (int i = 0; i < grid.size(); ++i) {
    const double expected = grid.age(i) == 5.0 ? 1.0 : 0.0;
    CHECK(std::abs(dist[i] - expected) < 1e-6);
  }

  // sigma down to 0.01 must stay finite.
  const LabelDistribution sharp =
      discretize_gaussian({.true_age = 5.0, .sigma = 0.01}, grid);
  for (int i = 0; i < grid.size(); ++i) {
    CHECK(std::isfinite(sharp[i]));
  }
  CHECK(sharp[4] == doctest::Approx(1.0));
}

TEST_CASE("discretize_gaussian rejects bad parameters") {
  const AgeGrid grid(1, 10);
  CHECK_THROWS_AS(discretize_gaussian({.true_age = 5.0, .sigma = 0.0}, grid),
                  InvalidParameterError);
  CHECK_THROWS_AS(discretize_gaussian({.true_age = 5.0, .sigma = -1.0}, grid),
                  InvalidParameterError);
}

TEST_CASE("out-of-grid targets warn and pile up at the boundary") {
  std::vector<std::string> messages;
  WarningHandler previous = set_warning_handler(
      [&messages](const std::string& m) { messages.push_back(m); });

  const AgeGrid grid(10, 20);
  const LabelDistribution dist = discretize_gaussian({.true_age = 3.0, .sigma = 1.0}, grid);
  CHECK(messages.size() == 1);
  int argmax = 0;
  for (int i = 1; i < grid.size(); ++i) {
    if (dist[i] > dist[argmax]) argmax = i;
  }
  CHECK(argmax == 0);

  messages.clear();
  discretize_gaussian({.true_age = 15.0, .sigma = 1.0}, grid);
  CHECK(messages.empty());

  set_warning_handler(previous);
}

TEST_CASE("expected_age basics") {
  const AgeGrid small(1, 3);
  CHECK(expected_age(LabelDistribution::uniform(small)) == doctest::Approx(2.0));

  const AgeGrid wide(1, 10);
  CHECK(expected_age(LabelDistribution::one_hot(wide, 7)) == 7.0);

  // Mass 0.25 on age 10 and 0.75 on age 20.
  const AgeGrid tens(10, 20);
  std::vector<double> probs(tens.size(), 0.0);
  probs.front() = 0.25;
  probs.back() = 0.75;
  CHECK(expected_age(LabelDistribution(tens, probs)) == doctest::Approx(17.5));
}

TEST_CASE("distribution_variance basics") {
  const AgeGrid grid(1, 3);
  CHECK(distribution_variance(LabelDistribution::one_hot(grid, 2)) == 0.0);
  CHECK(distribution_variance(LabelDistribution::uniform(grid)) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  const LabelDistribution gauss = discretize_gaussian({.true_age = 2.0, .sigma = 1.0}, grid);
  // Independent summation: 2 * p_side * 1^2.
  CHECK(distribution_variance(gauss) == doctest::Approx(2.0 * gauss[0]).epsilon(1e-12));
  CHECK(distribution_variance(gauss) == doctest::Approx(0.548138).epsilon(1e-5));
}

TEST_CASE("softmax is shift invariant and normalized") {
  const std::vector<double> logits{1.0, 2.0, 3.0};
  const std::vector<double> shifted{101.0, 102.0, 103.0};
  const std::vector<double> a = softmax(logits);
  const std::vector<double> b = softmax(shifted);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));
    sum += a[i];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  const AgeGrid grid(1, 3);
  CHECK_THROWS_AS(softmax_distribution(grid, std::vector<double>{1.0, 2.0}),
                  InvalidParameterError);
}

TEST_CASE("randomized distribution properties") {
  Rng rng(20260810);
  const double sigmas[] = {0.1, 0.5, 1.0, 3.0};
  for (int round = 0; round < 500; ++round) {
    const int min_age = static_cast<int>(rng.uniform_int(1, 60));
    const int max_age = min_age + static_cast<int>(rng.uniform_int(1, 60));
    const AgeGrid grid(min_age, max_age);
    const double t = min_age + rng.uniform() * (max_age - min_age);
    const double sigma = sigmas[rng.uniform_int(0, 3)];
    const LabelDistribution dist = discretize_gaussian({.true_age = t, .sigma = sigma}, grid);

    double sum = 0.0;
    double max_prob = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
      REQUIRE(dist[i] >= 0.0);
      REQUIRE(dist[i] <= 1.0);
      sum += dist[i];
      max_prob = std::max(max_prob, dist[i]);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);

    // The grid age nearest to t carries the maximum probability (ties
    // allowed when t is equidistant between two ages).
    CHECK(dist[grid.nearest_index(t)] >= max_prob - 1e-12);

    // Shift equivariance.
    const int shift = static_cast<int>(rng.uniform_int(1, 20));
    const AgeGrid shifted(min_age + shift, max_age + shift);
    const LabelDistribution shifted_dist =
        discretize_gaussian({.true_age = t + shift, .sigma = sigma}, shifted);
    for (int i = 0; i < grid.size(); ++i) {
      CHECK(std::abs(dist[i] - shifted_dist[i]) <= 1e-12);
    }

    // Moment ranges.
    const double mean = expected_age(dist);
    CHECK(mean >= min_age);
    CHECK(mean <= max_age);
    const double range = max_age - min_age;
    CHECK(distribution_variance(dist) >= 0.0);
    CHECK(distribution_variance(dist) <= range * range / 4.0 + 1e-9);
  }
}

TEST_CASE("variance grows with sigma for a centred target") {
  const AgeGrid grid(1, 41);
  const double t = 21.0;
  double previous = -1.0;
  for (const double sigma : {0.1, 0.5, 1.0, 3.0}) {
    const double v =
        distribution_variance(discretize_gaussian({.true_age = t, .sigma = sigma}, grid));
    CHECK(v >= previous);
    previous = v;
  }
}
