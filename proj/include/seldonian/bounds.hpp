#pragma once
// Concentration-bound primitives used by every safety test and candidate
// objective: Hoeffding and Student-t upper bounds on the mean of a sample,
// plus the inflated "predicted" forms used while searching for a candidate.
//
// All functions are pure. Sample vectors must be non-empty and finite.

#include <cstddef>
#include <map>
#include <shared_mutex>
#include <span>
#include <utility>

namespace seldonian {

double sample_mean(std::span<const double> z);

// Bessel-corrected sample standard deviation; requires at least two values.
double sample_stddev(std::span<const double> z);

// mean(Z) + b * sqrt(ln(1/delta) / (2m)).  b is the range of the sampled
// variable; the guarantee is only formal when b really bounds that range.
double hoeffding_upper(std::span<const double> z, double range, double delta);

// What hoeffding_upper would return on a fresh sample of k values, deliberately
// over-predicted: mean(Z) + b * sqrt(ln(1/delta) / k).
double predict_hoeffding_upper(std::span<const double> z, double range, double delta,
                               std::size_t k);

// Inverse CDF of Student's t with `dof` degrees of freedom.
double t_quantile(double confidence, std::size_t dof);

// Student's t distribution function, exposed for tests and the quantile solver.
double t_cdf(double t, std::size_t dof);

// mean(Z) + (sigma / sqrt(m)) * t_{1-delta, m-1}.
double t_upper(std::span<const double> z, double delta);

// mean(Z) - (sigma / sqrt(m)) * t_{1-delta, m-1}.
double t_lower(std::span<const double> z, double delta);

// Conservative prediction of t_upper on a future sample of size k:
// mean(Z) + 2 * (sigma / sqrt(k)) * t_{1-delta, k-1}.
double predict_t_upper(std::span<const double> z, double delta, std::size_t k);

/// Thread-safe memo of t quantiles keyed by (confidence, dof).
///
/// Candidate searches evaluate the same quantile thousands of times; a table
/// shared between worker threads avoids re-running the root finder.
class TQuantileTable {
 public:
  double operator()(double confidence, std::size_t dof) const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  mutable std::map<std::pair<double, std::size_t>, double> cache_;
};

TQuantileTable& shared_t_table();

}  // namespace seldonian
