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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "ldlage/error.hpp"
#include "ldlage/rng.hpp"
#include "oracles.hpp"

using namespace ldlage;

namespace {

// One randomized loss-level gradient check; returns the worst discrepancy.
double gradient_check_once(Rng& rng) {
  const int k_options[] = {3, 10, 50};
  const double lambda_options[] = {0.0, 0.1, 1.0, 10.0};
  const double sigma_options[] = {0.1, 0.5, 1.0, 3.0};

  const int k = k_options[rng.uniform_int(0, 2)];
  const AgeGrid grid(1, k);
  HybridLossConfig config;
  do {
    config.lambda1 = lambda_options[rng.uniform_int(0, 3)];
    config.lambda2 = lambda_options[rng.uniform_int(0, 3)];
    config.lambda3 = lambda_options[rng.uniform_int(0, 3)];
  } while (config.lambda1 == 0.0 && config.lambda2 == 0.0 && config.lambda3 == 0.0);
  config.sigma = sigma_options[rng.uniform_int(0, 3)];

  std::vector<double> logits(static_cast<std::size_t>(k));
  double true_age = 0.0;
  while (true) {
    for (double& z : logits) z = rng.normal(0.0, 2.0);
    true_age = 1.0 + rng.uniform() * (k - 1);
    const double mean = expected_age(softmax_distribution(grid, logits));
    // Configurations adjacent to the L1 kink are resampled: central
    // differences straddle the non-differentiable point there.
    if (std::abs(mean - true_age) > 1e-3) break;
  }

  const std::vector<double> analytic =
      hybrid_loss_gradient(config, true_age, logits, grid);

  const auto loss_at = [&](std::span<const double> z) {
    return hybrid_loss(config, true_age, z, grid).total;
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double numeric = oracle::central_difference(loss_at, logits, i, 1e-5);
    worst = std::max(worst, oracle::relative_error(analytic[i], numeric));
  }
  return worst;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS((HybridLossConfig{.lambda1 = -1.0}.validate()), InvalidParameterError);
  CHECK_THROWS_AS(
      (HybridLossConfig{.lambda1 = 0, .lambda2 = 0, .lambda3 = 0}.validate()),
      InvalidParameterError);
  CHECK_THROWS_AS((HybridLossConfig{.sigma = 0.0}.validate()), InvalidParameterError);
  CHECK_NOTHROW((HybridLossConfig{.lambda1 = 0, .lambda2 = 1, .lambda3 = 0}.validate()));
}

TEST_CASE("kl loss identities") {
  const AgeGrid grid(1, 4);
  const LabelDistribution p(grid, {0.1, 0.2, 0.3, 0.4});
  CHECK(kl_loss(p, p) == 0.0);

  // One-hot target reduces to cross-entropy.
  const LabelDistribution onehot = LabelDistribution::one_hot(grid, 3);
  const LabelDistribution q(grid, {0.25, 0.25, 0.4, 0.1});
  CHECK(kl_loss(onehot, q) == doctest::Approx(-std::log(0.4)).epsilon(1e-12));

  // 0.5 ln 2 + 0.5 ln(2/3), summed by hand.
  const AgeGrid pair_grid(1, 2);
  const LabelDistribution half(pair_grid, {0.5, 0.5});
  const LabelDistribution skew(pair_grid, {0.25, 0.75});
  CHECK(kl_loss(half, skew) == doctest::Approx(0.143841036).epsilon(1e-7));

  const AgeGrid other(2, 5);
  CHECK_THROWS_AS(kl_loss(p, LabelDistribution::uniform(other)), InvalidParameterError);
}

TEST_CASE("kl loss is non-negative on random pairs") {
  Rng rng(7);
  const AgeGrid grid(1, 12);
  for (int round = 0; round < 300; ++round) {
    std::vector<double> a(12), b(12);
    double sa = 0.0, sb = 0.0;
    for (int i = 0; i < 12; ++i) {
      a[i] = -std::log(1.0 - rng.uniform());
      b[i] = -std::log(1.0 - rng.uniform());
      sa += a[i];
      sb += b[i];
    }
    for (int i = 0; i < 12; ++i) {
      a[i] /= sa;
      b[i] /= sb;
    }
    const LabelDistribution pa(grid, a);
    const LabelDistribution pb(grid, b);
    CHECK(kl_loss(pa, pb) >= 0.0);
  }
}

TEST_CASE("cross-entropy limit for small sigma") {
  const AgeGrid grid(1, 30);
  Rng rng(11);
  for (const double sigma : {0.05, 0.1}) {
    for (int round = 0; round < 100; ++round) {
      const int t = static_cast<int>(rng.uniform_int(1, 30));
      const LabelDistribution target =
          discretize_gaussian({.true_age = static_cast<double>(t), .sigma = sigma}, grid);
      std::vector<double> q(30);
      double sum = 0.0;
      for (double& v : q) {
        v = 0.01 + rng.uniform();
        sum += v;
      }
      for (double& v : q) v /= sum;
      const LabelDistribution predicted(grid, q);
      const double ce = -std::log(q[static_cast<std::size_t>(t - 1)]);
      CHECK(std::abs(kl_loss(target, predicted) - ce) < 1e-4);
    }
  }
}

TEST_CASE("l1 age loss") {
  const AgeGrid grid(1, 3);
  const LabelDistribution uniform = LabelDistribution::uniform(grid);
  CHECK(l1_age_loss(2.0, uniform) == doctest::Approx(0.0));
  CHECK(l1_age_loss(4.0, uniform) == doctest::Approx(2.0));

  const AgeGrid wide(1, 10);
  CHECK(l1_age_loss(7.0, LabelDistribution::one_hot(wide, 7)) == 0.0);

  // Invariant under a joint integer shift of grid and age.
  const AgeGrid shifted(11, 13);
  const LabelDistribution shifted_uniform = LabelDistribution::uniform(shifted);
  CHECK(l1_age_loss(14.0, shifted_uniform) == doctest::Approx(2.0));
}

TEST_CASE("variance loss delegates to the distribution variance") {
  const AgeGrid grid(1, 3);
  CHECK(variance_loss(LabelDistribution::one_hot(grid, 1)) == 0.0);
  CHECK(variance_loss(LabelDistribution::uniform(grid)) == doctest::Approx(2.0 / 3.0));
  const LabelDistribution gauss = discretize_gaussian({.true_age = 2.0, .sigma = 1.0}, grid);
  CHECK(variance_loss(gauss) == doctest::Approx(0.548138).epsilon(1e-5));
}

TEST_CASE("hybrid loss composition") {
  const AgeGrid grid(1, 5);
  const std::vector<double> logits(5, 0.7);  // equal logits -> uniform softmax
  const double t = 3.0;

  SUBCASE("component isolation") {
    const LossBreakdown kl_only =
        hybrid_loss({.lambda1 = 1, .lambda2 = 0, .lambda3 = 0, .sigma = 1}, t, logits, grid);
    CHECK(kl_only.total == kl_only.kl);

    const LossBreakdown l1_only =
        hybrid_loss({.lambda1 = 0, .lambda2 = 1, .lambda3 = 0, .sigma = 1}, t, logits, grid);
    CHECK(l1_only.total == l1_only.l1);

    const LossBreakdown var_only =
        hybrid_loss({.lambda1 = 0, .lambda2 = 0, .lambda3 = 1, .sigma = 1}, t, logits, grid);
    CHECK(var_only.total == var_only.variance);
  }

  SUBCASE("uniform prediction at the grid midpoint") {
    const LossBreakdown loss = hybrid_loss(
        {.lambda1 = 1, .lambda2 = 1, .lambda3 = 0.1, .sigma = 1}, t, logits, grid);
    // KL(target || uniform) summed independently offline: 0.237519610420.
    CHECK(loss.kl == doctest::Approx(0.237519610420).epsilon(1e-9));
    CHECK(loss.l1 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(loss.variance == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(loss.total == doctest::Approx(loss.kl + 0.2).epsilon(1e-12));
  }

  SUBCASE("breakdown recombines exactly") {
    Rng rng(3);
    for (int round = 0; round < 50; ++round) {
      HybridLossConfig config{.lambda1 = rng.uniform() * 2,
                              .lambda2 = rng.uniform() * 2,
                              .lambda3 = rng.uniform(),
                              .sigma = 0.2 + rng.uniform() * 2};
      std::vector<double> z(5);
      for (double& v : z) v = rng.normal(0.0, 1.5);
      const LossBreakdown loss = hybrid_loss(config, 1.0 + rng.uniform() * 4, z, grid);
      const double recombined = config.lambda1 * loss.kl + config.lambda2 * loss.l1 +
                                config.lambda3 * loss.variance;
      CHECK(std::abs(loss.total - recombined) <= 1e-10);
      CHECK(loss.kl >= 0.0);
      CHECK(loss.l1 >= 0.0);
      CHECK(loss.variance >= 0.0);
    }
  }

  SUBCASE("length mismatch") {
    const std::vector<double> wrong(4, 0.0);
    CHECK_THROWS_AS(hybrid_loss({.sigma = 1}, t, wrong, grid), InvalidParameterError);
    CHECK_THROWS_AS(hybrid_loss_gradient({.sigma = 1}, t, wrong, grid),
                    InvalidParameterError);
  }
}

TEST_CASE("gradient vanishes at the KL optimum") {
  const AgeGrid grid(1, 5);
  const LabelDistribution target = discretize_gaussian({.true_age = 3.0, .sigma = 1.0}, grid);
  std::vector<double> logits(5);
  for (int i = 0; i < 5; ++i) logits[static_cast<std::size_t>(i)] = std::log(target[i]);
  const std::vector<double> grad = hybrid_loss_gradient(
      {.lambda1 = 1, .lambda2 = 0, .lambda3 = 0, .sigma = 1}, 3.0, logits, grid);
  for (const double g : grad) {
    CHECK(std::abs(g) < 1e-10);
  }
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(20260810);
  double worst = 0.0;
  for (int round = 0; round < 150; ++round) {
    worst = std::max(worst, gradient_check_once(rng));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("one-hot-concentrated logits still match finite differences") {
  const AgeGrid grid(1, 10);
  std::vector<double> logits(10, -4.0);
  logits[6] = 6.0;  // sharply concentrated prediction
  const HybridLossConfig config{.lambda1 = 0, .lambda2 = 0, .lambda3 = 1, .sigma = 1};
  const double t = 4.3;
  const std::vector<double> analytic = hybrid_loss_gradient(config, t, logits, grid);
  const auto loss_at = [&](std::span<const double> z) {
    return hybrid_loss(config, t, z, grid).total;
  };
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double numeric = oracle::central_difference(loss_at, logits, i, 1e-5);
    CHECK(oracle::relative_error(analytic[i], numeric) < 1e-4);
  }
}
