#pragma once
// Seldonian linear regression.
//
// Every algorithm here follows the same shape: split the data into a
// candidate-selection part D1 and a safety-test part D2, pick a candidate on
// D1 with an objective that predicts whether the candidate will pass, then
// return it only if a high-confidence bound computed on D2 certifies the
// behavioral constraint. Otherwise the result is NoSolutionFound.
//
// The discrimination statistic pairs the i-th type-0 row with the i-th
// type-1 row (dataset order) and uses Z_i = (theta^T x0_i - y0_i) -
// (theta^T x1_i - y1_i). Surplus rows of the majority type are unused.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seldonian/dataset.hpp"
#include "seldonian/optimizer.hpp"

namespace seldonian {

// A type with no members makes the paired statistic undefined.
class ConstraintInfeasible : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct RegressionOutcome {
  // Empty means No Solution Found.
  std::optional<Weights> solution;
  // The candidate submitted to the safety test (empty if none was formed).
  Weights candidate;
  // Safety-test bound per constraint, as compared against the threshold.
  std::vector<double> safety_bounds;
  std::size_t evaluations = 0;
  bool search_converged = false;
  std::string diagnostic;

  bool found() const { return solution.has_value(); }
};

using ConstraintEstimator =
    std::function<std::vector<double>(std::span<const double> theta, const Dataset& data)>;

// One behavioral constraint g(theta) <= 0, given by per-sample unbiased
// estimates of g and the admissible failure probability delta.
struct ConstraintSpec {
  ConstraintEstimator estimator;
  double delta = 0.05;
  std::string description;
};

using UtilityEstimator = std::function<double(std::span<const double> theta, const Dataset& data)>;

std::vector<double> paired_error_diffs(std::span<const double> theta, const Dataset& d);

// Z'_i = theta^T x0_i - theta^T x1_i: the paired difference in predictions.
std::vector<double> paired_prediction_diffs(std::span<const double> theta, const Dataset& d);

/// Sufficient statistics of a dataset for the candidate objectives.
///
/// Both the sample MSE and the moments of Z are low-degree polynomials in
/// theta, so the search evaluates them in O(l^2) per point instead of O(m).
/// Results agree with the per-sample formulas up to rounding.
class PairedErrorMoments {
 public:
  explicit PairedErrorMoments(const Dataset& d);

  std::size_t pair_count() const { return pairs_; }
  std::size_t row_count() const { return rows_; }
  std::size_t feature_count() const { return l_; }

  double mse(std::span<const double> theta) const;
  double z_mean(std::span<const double> theta) const;
  // Bessel-corrected; needs at least two pairs.
  double z_stddev(std::span<const double> theta) const;

 private:
  std::size_t l_ = 0;
  std::size_t rows_ = 0;
  std::size_t pairs_ = 0;
  std::vector<double> gram_;      // (1/m) sum x x^T, l*l
  std::vector<double> cross_;     // (1/m) sum x y
  double y_sq_ = 0.0;             // (1/m) sum y^2
  std::vector<double> pair_mean_; // mean of (dx, dy), l+1
  std::vector<double> pair_cov_;  // covariance of (dx, dy), (l+1)^2
};

// Candidate objective with Hoeffding's inequality. Returns the sample MSE
// when the larger of the two predicted bounds (on Z and -Z, each at delta/2,
// sized for k future samples) is at most epsilon, else b^2 + ub - epsilon.
double hoeffding_candidate_objective(std::span<const double> theta, const Dataset& d1, double delta,
                                     double epsilon, double range, std::size_t k);
double hoeffding_candidate_objective(std::span<const double> theta, const PairedErrorMoments& d1,
                                     double delta, double epsilon, double range, std::size_t k);

// max{hoeffding_upper(Z, b, delta/2), hoeffding_upper(-Z, b, delta/2)}
double hoeffding_safety_bound(std::span<const double> theta, const Dataset& d2, double delta,
                              double range);

// Non-discriminatory linear regression with Hoeffding bounds.
RegressionOutcome ndlr(const Dataset& d, double delta, double epsilon, double range,
                       const SearchConfig& cfg);

// Candidate objective with Student's t. Inside the predicted-feasible region
// returns MSE + lambda * mean(Z); otherwise b^2 + ub + (lambda - 1) epsilon,
// where b only scales the barrier.
double ttest_candidate_objective(std::span<const double> theta, const Dataset& d1, double delta,
                                 double epsilon, std::size_t k, double lambda, double range);
double ttest_candidate_objective(std::span<const double> theta, const PairedErrorMoments& d1,
                                 double delta, double epsilon, std::size_t k, double lambda,
                                 double range);

// max{t_upper(Z, delta/2), t_upper(-Z, delta/2)}; needs at least two pairs.
double ttest_safety_bound(std::span<const double> theta, const Dataset& d2, double delta);

// Barrier scale used when none is supplied: 3 * max |y| over the rows the
// candidate search sees.
double default_barrier_range(const Dataset& d1);

// Quasi-non-discriminatory linear regression (lambda = 0) and its
// soft-penalized variant (lambda > 0). `range` <= 0 selects
// default_barrier_range(D1).
RegressionOutcome qndlr(const Dataset& d, double delta, double epsilon, double lambda,
                        const SearchConfig& cfg, double range = 0.0);

// Safety test of the general algorithm: for every constraint,
// mean(g) + sigma(g)/sqrt(n) t_{1-delta_i, n-1} over g = estimator(theta, D2),
// n = |g|. Returns the bounds; the test passes iff all are <= 0. Throws
// std::domain_error if an estimator yields fewer than two values.
std::vector<double> general_safety_bounds(std::span<const double> theta, const Dataset& d2,
                                          std::span<const ConstraintSpec> constraints);

// The general quasi-Seldonian regression algorithm: the candidate maximizes
// `utility` on D1 subject to the predicted safety test
// mean(g) + 2 sigma(g)/sqrt(|D2|) t_{1-delta_i, |D2|-1} <= 0 for every
// constraint (enforced as a barrier), then must pass general_safety_bounds.
RegressionOutcome quasi_seldonian_general(const Dataset& d,
                                          std::span<const ConstraintSpec> constraints,
                                          const UtilityEstimator& utility, const SearchConfig& cfg);

// Ready-made constraints. `upper` selects g = Z - eps (Z too large) versus
// g = -Z - eps (Z too small).
ConstraintSpec error_difference_constraint(double epsilon, double delta, bool upper);
ConstraintSpec prediction_difference_constraint(double epsilon, double delta, bool upper);

// |mean error difference| <= eps as two one-sided constraints at delta/2 each.
std::vector<ConstraintSpec> absolute_error_difference_constraints(double epsilon, double delta);
// |mean prediction difference| <= eps as two one-sided constraints at delta/2 each.
std::vector<ConstraintSpec> absolute_prediction_difference_constraints(double epsilon, double delta);

// -(sample MSE + lambda * mean(Z)): the utility QNDLR(lambda) maximizes.
UtilityEstimator negative_mse_utility(double lambda = 0.0);

}  // namespace seldonian
