#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "seldonian/bounds.hpp"
#include "seldonian/random.hpp"
#include "seldonian/rl.hpp"

using namespace seldonian;

namespace {

const BoxDistribution kUnit({0.0, 0.0}, {1.0, 1.0});

EpisodeRecord ep(Policy p, double r, double r1) { return {p, r, {r1}}; }

}  // namespace

TEST_CASE("box densities and overlaps") {
  const BoxDistribution quarter({0.0, 0.0}, {0.5, 0.5});
  CHECK(box_pdf(kUnit, {0.3, 0.9}) == 1.0);
  CHECK(box_pdf(quarter, {0.25, 0.25}) == 4.0);
  CHECK(box_pdf(quarter, {0.75, 0.25}) == 0.0);
  CHECK(box_pdf(quarter, {0.5, 0.5}) == 4.0);
  CHECK(overlap_mass(quarter, kUnit) == doctest::Approx(0.25));
  CHECK(overlap_mass(kUnit, kUnit) == 1.0);
  CHECK(kUnit.contains(quarter));
  CHECK_FALSE(quarter.contains(kUnit));
  CHECK_THROWS_AS(BoxDistribution({0.0, 0.0}, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("reward functions") {
  const double k = kMgPerDlPerMmol;
  CHECK(reward_r(4.0 * k) == doctest::Approx(-0.8));
  CHECK(reward_r1(4.0 * k) == doctest::Approx(-0.8));
  CHECK(reward_r(8.0 * k) == doctest::Approx(-0.4));
  CHECK(reward_r1(8.0 * k) == 0.0);
  CHECK(reward_r(6.0 * k) == doctest::Approx(0.0));
  CHECK(reward_r(5.0 * k) < reward_r(7.0 * k));
}

TEST_CASE("toy environment closed forms agree with Monte Carlo") {
  const ToyEnvironment env;
  Rng rng(21);
  for (const Policy p : {Policy{0.1, 0.2}, Policy{0.5, 0.5}, Policy{0.9, 1.0}}) {
    const std::size_t n = 60000;
    double s = 0, ss = 0, s1 = 0, ss1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto e = env.episode(p, rng);
      s += e.ret;
      ss += e.ret * e.ret;
      s1 += e.constraint_returns[0];
      ss1 += e.constraint_returns[0] * e.constraint_returns[0];
    }
    const double se = std::sqrt((ss / n - (s / n) * (s / n)) / n);
    const double se1 = std::sqrt((ss1 / n - (s1 / n) * (s1 / n)) / n);
    CHECK(std::abs(s / n - env.expected_return(p)) <= 4 * se + 1e-12);
    CHECK(std::abs(s1 / n - env.expected_constraint_return(p)) <= 4 * se1 + 1e-12);
  }
  CHECK_THROWS_AS(env.episode({1.5, 0.5}, rng), std::domain_error);
}

TEST_CASE("box expectations match a fine midpoint rule") {
  const ToyEnvironment env;
  const BoxDistribution box({0.1, 0.2}, {0.6, 0.7});
  const int n = 400;
  double acc = 0.0, acc1 = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Policy p{0.1 + 0.5 * (i + 0.5) / n, 0.2 + 0.5 * (j + 0.5) / n};
      acc += env.expected_return(p);
      acc1 += env.expected_constraint_return(p);
    }
  }
  CHECK(env.expected_return(box) == doctest::Approx(acc / (n * n)).epsilon(1e-6));
  CHECK(env.expected_constraint_return(box) == doctest::Approx(acc1 / (n * n)).epsilon(1e-6));
}

TEST_CASE("tiling yields 27 quarter-area boxes inside the behavior support") {
  const auto tiles = tiled_candidates(kUnit);
  REQUIRE(tiles.size() == 27);
  for (const auto& t : tiles) {
    CHECK(kUnit.contains(t));
    CHECK(t.volume() == doctest::Approx(0.25));
  }
}

TEST_CASE("problem construction validates support") {
  CHECK_THROWS_AS(RLProblem(kUnit, {}, {0.05}), std::invalid_argument);
  CHECK_THROWS_AS(RLProblem(kUnit, {BoxDistribution({0.5, 0.5}, {1.5, 1.0})}, {0.05}), std::invalid_argument);
  CHECK_THROWS_AS(RLProblem(kUnit, {kUnit}, {1.0}), std::invalid_argument);
  const RLProblem ok(kUnit, {BoxDistribution({0.0, 0.0}, {0.5, 0.5})}, {0.05});
  CHECK(ok.overlap(0) == doctest::Approx(0.25));
}

TEST_CASE("importance estimate") {
  std::vector<EpisodeRecord> episodes{ep({0.2, 0.2}, 1.0, 0.0), ep({0.3, 0.4}, 3.0, 0.0),
                                      ep({0.8, 0.8}, 100.0, 0.0)};
  SUBCASE("identical distributions give the sample mean") {
    CHECK(importance_estimate(episodes, kUnit, kUnit, primary_return()) == doctest::Approx(104.0 / 3.0));
  }
  SUBCASE("quarter support gives the in-support mean") {
    const BoxDistribution quarter({0.0, 0.0}, {0.5, 0.5});
    CHECK(importance_estimate(episodes, quarter, kUnit, primary_return()) == doctest::Approx(2.0));
  }
  SUBCASE("no episode in support is an error") {
    const BoxDistribution corner({0.9, 0.0}, {1.0, 0.1});
    CHECK_THROWS_AS(importance_estimate(episodes, corner, kUnit, primary_return()), std::domain_error);
  }
}

TEST_CASE("discrete mirror of the estimator is unbiased") {
  // Five policies; brute-force expectation versus the mean of many estimates.
  const double behavior = 0.2;
  const double cand[5] = {0.0, 0.1, 0.4, 0.0, 0.5};
  const double mean_ret[5] = {4.0, -1.0, 2.0, 7.0, 0.5};
  const double overlap = 0.6;
  double truth = 0.0;
  for (int p = 0; p < 5; ++p) truth += cand[p] * mean_ret[p];

  Rng rng(77);
  const int reps = 10000;
  double sum = 0.0, sum_sq = 0.0;
  int used = 0;
  std::vector<WeightedReturn> samples(15);
  while (used < reps) {
    bool any = false;
    for (auto& s : samples) {
      const int p = static_cast<int>(rng.uniform() * 5.0);
      s = {cand[p], behavior, rng.normal(mean_ret[p], 2.0)};
      any = any || cand[p] != 0.0;
    }
    if (!any) continue;
    const double est = in_support_importance_estimate(samples, overlap);
    sum += est;
    sum_sq += est * est;
    ++used;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum_sq / reps - mean * mean) / (reps - 1));
  CHECK(std::abs(mean - truth) <= 3.0 * se);
}

TEST_CASE("per-test confidence splits delta evenly over l + 1 tests") {
  CHECK(per_test_confidence(0.05, 27) == doctest::Approx(0.05 / 28.0));
  // Union-bound audit: the nominal failure masses add back up to delta.
  double total = 0.0;
  for (int i = 0; i < 28; ++i) total += per_test_confidence(0.05, 27);
  CHECK(total == doctest::Approx(0.05));
}

TEST_CASE("quasi-seldonian selection examples") {
  const ToyEnvironment env;
  Rng rng(3);
  const auto episodes = env.sample_batch(kUnit, 200, rng);

  SUBCASE("a candidate equal to the behavior cannot beat its own upper bound") {
    const RLProblem p(kUnit, {kUnit}, {0.05});
    const auto out = quasi_seldonian_rl(episodes, p);
    CHECK_FALSE(out.found());
  }
  SUBCASE("zero constraint returns make every candidate safe") {
    auto flat = episodes;
    for (auto& e : flat) e.constraint_returns[0] = 0.0;
    const RLProblem p(kUnit, tiled_candidates(kUnit), {0.05});
    const auto out = quasi_seldonian_rl(flat, p);
    CHECK(std::all_of(out.safe.begin(), out.safe.end(), [](bool s) { return s; }));
    REQUIRE(out.found());
    CHECK(out.chosen == unconstrained_rl(flat, p).chosen);
  }
  SUBCASE("absolute thresholds") {
    const RLProblem p(kUnit, tiled_candidates(kUnit), {0.05});
    const std::vector<double> low{-1e9}, high{1e9};
    const auto all = absolute_threshold_constraint(episodes, p, low);
    CHECK(std::all_of(all.safe.begin(), all.safe.end(), [](bool s) { return s; }));
    CHECK_FALSE(absolute_threshold_constraint(episodes, p, high).found());
    // Data-derived thresholds reproduce the quasi-Seldonian decision.
    const auto beta = behavior_thresholds(episodes, p);
    const auto a = absolute_threshold_constraint(episodes, p, beta);
    const auto b = quasi_seldonian_rl(episodes, p);
    CHECK(a.chosen == b.chosen);
    CHECK(a.safe == b.safe);
  }
}

TEST_CASE("selection is invariant to a positive rescaling of the returns") {
  const ToyEnvironment env;
  Rng rng(8);
  const auto episodes = env.sample_batch(kUnit, 300, rng);
  auto scaled = episodes;
  for (auto& e : scaled) {
    e.ret *= 3.5;
    e.constraint_returns[0] *= 3.5;
  }
  const RLProblem p(kUnit, tiled_candidates(kUnit), {0.05});
  const auto a = quasi_seldonian_rl(episodes, p);
  const auto b = quasi_seldonian_rl(scaled, p);
  CHECK(a.safe == b.safe);
  CHECK(a.chosen == b.chosen);
  for (std::size_t j = 0; j < a.thresholds.size(); ++j) {
    CHECK(b.thresholds[j] == doctest::Approx(3.5 * a.thresholds[j]));
  }
}

TEST_CASE("safe set does not depend on candidate order") {
  const ToyEnvironment env;
  Rng rng(10);
  const auto episodes = env.sample_batch(kUnit, 250, rng);
  auto tiles = tiled_candidates(kUnit);
  const RLProblem fwd(kUnit, tiles, {0.05});
  std::reverse(tiles.begin(), tiles.end());
  const RLProblem rev(kUnit, tiles, {0.05});
  const auto a = quasi_seldonian_rl(episodes, fwd);
  const auto b = quasi_seldonian_rl(episodes, rev);
  for (std::size_t i = 0; i < a.safe.size(); ++i) CHECK(a.safe[i] == b.safe[a.safe.size() - 1 - i]);
}

TEST_CASE("noise-free environment with a dominant candidate") {
  ToyEnvironmentParams params;
  params.noise_sd = 0.0;
  const ToyEnvironment env(params);
  Rng rng(2);
  const auto episodes = env.sample_batch(kUnit, 400, rng);
  // Candidates: the low-p1 corner (hypoglycemic) and a box around the best p1.
  const BoxDistribution bad({0.0, 0.0}, {0.2, 1.0});
  const BoxDistribution good({0.2, 0.0}, {0.4, 1.0});
  const RLProblem p(kUnit, {bad, good}, {0.05});
  CHECK(unconstrained_rl(episodes, p).chosen == std::optional<std::size_t>(1));
}

TEST_CASE("unconstrained selection never refuses when every candidate has data") {
  const ToyEnvironment env;
  Rng rng(12);
  const auto episodes = env.sample_batch(kUnit, 100, rng);
  const RLProblem p(kUnit, tiled_candidates(kUnit), {0.05});
  CHECK(unconstrained_rl(episodes, p).found());
}

TEST_CASE("a candidate with fewer than two in-support episodes is unsafe") {
  std::vector<EpisodeRecord> episodes;
  for (int i = 0; i < 20; ++i) episodes.push_back(ep({0.1 + 0.01 * i, 0.1}, 0.0, 0.0));
  episodes.push_back(ep({0.9, 0.9}, 5.0, 0.0));
  const BoxDistribution corner({0.8, 0.8}, {1.0, 1.0});
  const RLProblem p(kUnit, {corner}, {0.05});
  CHECK_FALSE(quasi_seldonian_rl(episodes, p).found());
}
