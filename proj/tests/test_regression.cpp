#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "seldonian/bounds.hpp"
#include "seldonian/random.hpp"
#include "seldonian/regression.hpp"
#include "seldonian/synthgen.hpp"

using namespace seldonian;

namespace {

Dataset from_rows(const std::vector<LabeledPoint>& rows) {
  Dataset d(rows.front().x.size(), true);
  for (const auto& r : rows) d.push_back(r);
  return d;
}

}  // namespace

TEST_CASE("paired differences use the i-th row of each type") {
  // Type order 0,1,0,0,1: pairs are (row0,row1) and (row2,row4); row3 is unused.
  const Dataset d = from_rows({{{1.0, 1.0}, 1.0, 0},
                               {{2.0, 1.0}, 0.0, 1},
                               {{3.0, 1.0}, 2.0, 0},
                               {{9.0, 1.0}, 9.0, 0},
                               {{0.0, 1.0}, 1.0, 1}});
  const Weights theta{1.0, 0.5};
  // errors: r0 = 0.5, r1 = 2.5, r2 = 1.5, r4 = -0.5
  const auto z = paired_error_diffs(theta, d);
  REQUIRE(z.size() == 2);
  CHECK(z[0] == doctest::Approx(0.5 - 2.5));
  CHECK(z[1] == doctest::Approx(1.5 - (-0.5)));
  const auto zp = paired_prediction_diffs(theta, d);
  CHECK(zp[0] == doctest::Approx(1.5 - 2.5));
  CHECK(zp[1] == doctest::Approx(3.5 - 0.5));
}

TEST_CASE("missing type makes the paired statistic infeasible") {
  const Dataset d = from_rows({{{1.0, 1.0}, 1.0, 0}, {{2.0, 1.0}, 0.0, 0}});
  CHECK_THROWS_AS(paired_error_diffs(Weights{1.0, 0.0}, d), ConstraintInfeasible);
}

TEST_CASE("sufficient statistics agree with the per-sample formulas") {
  const Dataset d = gen_illustrative({.m = 301, .seed = 4});
  const PairedErrorMoments mom(d);
  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const Weights theta{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const auto z = paired_error_diffs(theta, d);
    CHECK(mom.pair_count() == z.size());
    CHECK(mom.mse(theta) == doctest::Approx(sample_mse(theta, d)).epsilon(1e-10));
    CHECK(mom.z_mean(theta) == doctest::Approx(sample_mean(z)).epsilon(1e-10));
    CHECK(mom.z_stddev(theta) == doctest::Approx(sample_stddev(z)).epsilon(1e-9));
    for (double lambda : {0.0, 2.0}) {
      CHECK(ttest_candidate_objective(theta, mom, 0.05, 0.1, 1000, lambda, 9.0) ==
            doctest::Approx(ttest_candidate_objective(theta, d, 0.05, 0.1, 1000, lambda, 9.0)).epsilon(1e-9));
    }
    CHECK(hoeffding_candidate_objective(theta, mom, 0.05, 0.1, 6.0, 1000) ==
          doctest::Approx(hoeffding_candidate_objective(theta, d, 0.05, 0.1, 6.0, 1000)).epsilon(1e-9));
  }
}

TEST_CASE("candidate objectives follow the verbatim barrier forms") {
  const Dataset d = gen_illustrative({.m = 200, .seed = 2});
  const Weights theta{0.66, 0.0};  // strongly discriminatory, predicted to fail
  const auto z = paired_error_diffs(theta, d);
  std::vector<double> nz = z;
  for (auto& v : nz) v = -v;

  const double ub_h = std::max(predict_hoeffding_upper(z, 6.0, 0.025, 800), predict_hoeffding_upper(nz, 6.0, 0.025, 800));
  REQUIRE(ub_h > 0.1);
  CHECK(hoeffding_candidate_objective(theta, d, 0.05, 0.1, 6.0, 800) == doctest::Approx(36.0 + ub_h - 0.1));

  const double ub_t = std::max(predict_t_upper(z, 0.025, 800), predict_t_upper(nz, 0.025, 800));
  REQUIRE(ub_t > 0.1);
  CHECK(ttest_candidate_objective(theta, d, 0.05, 0.1, 800, 0.0, 5.0) == doctest::Approx(25.0 + ub_t - 0.1));
  CHECK(ttest_candidate_objective(theta, d, 0.05, 0.1, 800, 3.0, 5.0) == doctest::Approx(25.0 + ub_t + 2.0 * 0.1));

  // A huge epsilon puts every theta inside the predicted-feasible region.
  CHECK(ttest_candidate_objective(theta, d, 0.05, 1e9, 800, 2.0, 5.0) ==
        doctest::Approx(sample_mse(theta, d) + 2.0 * sample_mean(z)));
}

TEST_CASE("ndlr refuses at epsilon zero and returns least-squares-like fits for huge epsilon") {
  const Dataset d = gen_illustrative({.m = 2000, .seed = 17});
  SearchConfig cfg;
  const auto tight = ndlr(d, 0.05, 0.0, 6.0, cfg);
  CHECK_FALSE(tight.found());
  REQUIRE(tight.safety_bounds.size() == 1);
  CHECK(tight.safety_bounds[0] > 0.0);

  const auto loose = ndlr(d, 0.05, 1e6, 6.0, cfg);
  REQUIRE(loose.found());
  CHECK((*loose.solution)[0] == doctest::Approx(2.0 / 3.0).epsilon(0.1));
}

TEST_CASE("qndlr with huge epsilon minimizes mse on the candidate partition") {
  const Dataset d = gen_illustrative({.m = 5000, .seed = 23});
  SearchConfig cfg;
  const auto out = qndlr(d, 0.05, 1e6, 0.0, cfg);
  REQUIRE(out.found());
  const auto [d1, d2] = d.split(cfg.candidate_fraction);
  const PairedErrorMoments mom(d1);
  // Compare with a small perturbation grid around the result.
  const double best = mom.mse(*out.solution);
  for (double da : {-1e-3, 1e-3}) {
    for (double db : {-1e-3, 1e-3}) {
      const Weights th{(*out.solution)[0] + da, (*out.solution)[1] + db};
      CHECK(mom.mse(th) >= best - 1e-12);
    }
  }
}

TEST_CASE("refusal when a partition lacks pairs") {
  Dataset d(2, true);
  for (int i = 0; i < 50; ++i) d.push_back(std::vector<double>{double(i), 1.0}, double(i), i < 45 ? 0 : 1);
  SearchConfig cfg;
  // The first 20% of the rows are all type 0.
  const auto out = qndlr(d, 0.05, 0.1, 0.0, cfg);
  CHECK_FALSE(out.found());
  CHECK_FALSE(out.diagnostic.empty());
  const auto out2 = ndlr(d, 0.05, 0.1, 6.0, cfg);
  CHECK_FALSE(out2.found());
}

TEST_CASE("safety bounds are symmetric under a type-label flip") {
  const Dataset d = gen_illustrative({.m = 600, .seed = 8});
  const Dataset f = d.with_flipped_types();
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const Weights theta{rng.uniform(-1, 2), rng.uniform(-1, 1)};
    // Pairing is by order within each type, so the flipped pairs are the same
    // pairs with their roles swapped.
    CHECK(ttest_safety_bound(theta, f, 0.05) == doctest::Approx(ttest_safety_bound(theta, d, 0.05)));
    CHECK(hoeffding_safety_bound(theta, f, 0.05, 6.0) == doctest::Approx(hoeffding_safety_bound(theta, d, 0.05, 6.0)));
  }
}

TEST_CASE("algorithms are deterministic given data and config") {
  const Dataset d = gen_illustrative({.m = 3000, .seed = 31});
  SearchConfig cfg;
  cfg.seed = 77;
  const auto a = qndlr(d, 0.05, 0.1, 0.0, cfg);
  const auto b = qndlr(d, 0.05, 0.1, 0.0, cfg);
  CHECK(a.candidate == b.candidate);
  CHECK(a.safety_bounds == b.safety_bounds);
  CHECK(a.found() == b.found());
}

TEST_CASE("shuffled partition is a disjoint cover") {
  const Dataset d = gen_illustrative({.m = 101, .seed = 12});
  Rng rng(5);
  const auto [d1, d2] = d.shuffled(rng).split(0.2);
  CHECK(d1.size() == 20);
  CHECK(d2.size() == 81);
  std::vector<double> all, seen;
  for (std::size_t i = 0; i < d.size(); ++i) all.push_back(d.y(i));
  for (std::size_t i = 0; i < d1.size(); ++i) seen.push_back(d1.y(i));
  for (std::size_t i = 0; i < d2.size(); ++i) seen.push_back(d2.y(i));
  std::sort(all.begin(), all.end());
  std::sort(seen.begin(), seen.end());
  CHECK(all == seen);
}

TEST_CASE("general algorithm specializes to the qndlr safety test") {
  const Dataset d = gen_illustrative({.m = 4000, .seed = 19});
  const auto [d1, d2] = d.split(0.2);
  const auto constraints = absolute_error_difference_constraints(0.1, 0.05);
  Rng rng(1);
  for (int rep = 0; rep < 10; ++rep) {
    const Weights theta{rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5)};
    const auto bounds = general_safety_bounds(theta, d2, constraints);
    const double worst = *std::max_element(bounds.begin(), bounds.end());
    CHECK(worst + 0.1 == doctest::Approx(ttest_safety_bound(theta, d2, 0.05)).epsilon(1e-12));
    CHECK((worst <= 0.0) == (ttest_safety_bound(theta, d2, 0.05) <= 0.1));
  }
}

TEST_CASE("general algorithm with a trivially satisfied constraint returns the utility maximizer") {
  const Dataset d = gen_illustrative({.m = 2000, .seed = 3});
  const std::vector<ConstraintSpec> constraints{error_difference_constraint(1e6, 0.05, true)};
  SearchConfig cfg;
  const auto out = quasi_seldonian_general(d, constraints, negative_mse_utility(), cfg);
  REQUIRE(out.found());
  CHECK((*out.solution)[0] == doctest::Approx(2.0 / 3.0).epsilon(0.15));
}

TEST_CASE("general algorithm refuses degenerate estimators") {
  const Dataset d = gen_illustrative({.m = 200, .seed = 3});
  const std::vector<ConstraintSpec> constraints{
      {[](std::span<const double>, const Dataset&) { return std::vector<double>{0.0}; }, 0.05, "single"}};
  const auto out = quasi_seldonian_general(d, constraints, negative_mse_utility(), SearchConfig{});
  CHECK_FALSE(out.found());
  CHECK(out.diagnostic.find("single") != std::string::npos);
  CHECK_THROWS_AS(general_safety_bounds(Weights{0.0, 0.0}, d, constraints), std::domain_error);
}

TEST_CASE("both fairness constraints together cannot be met on the illustrative data") {
  // Prediction difference is 2 theta_1 and error difference 2 theta_1 - 2.
  const Dataset d = gen_illustrative({.m = 5000, .seed = 41});
  auto cs = absolute_error_difference_constraints(0.05, 0.05);
  const auto ps = absolute_prediction_difference_constraints(0.05, 0.05);
  cs.insert(cs.end(), ps.begin(), ps.end());
  const auto out = quasi_seldonian_general(d, cs, negative_mse_utility(), SearchConfig{});
  CHECK_FALSE(out.found());
}

TEST_CASE("minimize_candidate finds smooth minima") {
  SearchConfig cfg;
  const auto r = minimize_candidate([](std::span<const double> x) { return (x[0] - 3) * (x[0] - 3) + 2 * (x[1] + 1) * (x[1] + 1); }, 2, cfg);
  CHECK(r.theta[0] == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(r.theta[1] == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(r.converged);

  cfg.max_evaluations = 10;
  const auto capped = minimize_candidate([](std::span<const double> x) { return x[0] * x[0]; }, 1, cfg);
  CHECK(capped.evaluations <= 10);
  CHECK_FALSE(capped.converged);
}

TEST_CASE("minimize_candidate treats NaN as worse than anything") {
  SearchConfig cfg;
  cfg.initial_theta = {2.0};
  const auto r = minimize_candidate(
      [](std::span<const double> x) { return x[0] < 0.5 ? std::nan("") : (x[0] - 1) * (x[0] - 1); }, 1, cfg);
  CHECK(r.theta[0] == doctest::Approx(1.0).epsilon(1e-4));
}
