#pragma once
// Standard-approach comparators: least squares and soft-constrained linear
// regression (SCLR), plus the empirical discrimination statistic.

#include <cstddef>
#include <span>

#include "seldonian/dataset.hpp"
#include "seldonian/optimizer.hpp"

namespace seldonian {

struct LeastSquaresFit {
  Weights theta;
  std::size_t rank = 0;
  // Set when the design matrix is rank deficient; theta is then the
  // minimum-norm (pseudo-inverse) solution.
  bool rank_deficient = false;
};

LeastSquaresFit least_squares(const Dataset& d);

// Mean prediction error over type-0 rows minus the mean over type-1 rows,
// using every row. Throws std::domain_error if a type is missing.
double sample_disc_stat(std::span<const double> theta, const Dataset& d);

// Sample MSE + lambda * |sample_disc_stat|.
double sclr_objective(std::span<const double> theta, const Dataset& d, double lambda);

// Minimizes sclr_objective with the shared simplex search, started from the
// least-squares weights (cfg.initial_theta is ignored).
Weights sclr(const Dataset& d, double lambda, const SearchConfig& cfg);

}  // namespace seldonian
