#pragma once
// Derivative-free candidate search shared by the Seldonian algorithms and the
// soft-constrained baseline. The candidate objectives have a discontinuous
// barrier branch, so this is a Nelder-Mead simplex descent followed by a
// budgeted number of seeded restarts around the incumbent.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "seldonian/dataset.hpp"

namespace seldonian {

struct SearchConfig {
  // Share of the data used to pick the candidate; the rest is held out for
  // the safety test.
  double candidate_fraction = 0.2;
  // Objective evaluations allowed across the first descent and all restarts.
  std::size_t max_evaluations = 20000;
  std::size_t restarts = 3;
  // Stop when both the spread of simplex values and the simplex diameter
  // fall below these.
  double value_tolerance = 1e-12;
  double step_tolerance = 1e-9;
  double initial_step = 0.5;
  // Empty means the origin.
  Weights initial_theta;
  std::uint64_t seed = 0;
  // Shuffle the data with `seed` before the prefix split.
  bool shuffle = false;
  // Barrier level used by the general algorithm when a candidate is predicted
  // to fail; must exceed -f_hat on the feasible region.
  double barrier = 1e6;
};

using Objective = std::function<double(std::span<const double>)>;

struct MinimizeResult {
  Weights theta;
  double value = 0.0;
  std::size_t evaluations = 0;
  // False when the budget ran out before the tolerances were met; `theta`
  // is then the best point seen.
  bool converged = false;
};

MinimizeResult minimize_candidate(const Objective& objective, std::size_t dimension,
                                  const SearchConfig& cfg);

}  // namespace seldonian
