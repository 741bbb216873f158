#pragma once
// The illustrative hiring distribution and its closed-form oracles.
//
// T ~ Bernoulli(1/2); Y | T=0 ~ N(1,1), Y | T=1 ~ N(-1,1); X = Y + N(0,1).
// Rows carry features (x, 1). Per row the stream is consumed as: one
// uniform for T, one normal for Y, one normal for the X noise.

#include <cstddef>
#include <cstdint>
#include <span>

#include "seldonian/dataset.hpp"

namespace seldonian {

struct IllustrativeParams {
  std::size_t m = 1000;
  std::uint64_t seed = 0;
};

Dataset gen_illustrative(const IllustrativeParams& params);

// d(theta) = E[err | T=0] - E[err | T=1] = 2 theta_1 - 2 (the intercept cancels).
double true_disc_stat(std::span<const double> theta);

// E[(theta_1 X + theta_2 - Y)^2] = 3 theta_1^2 + theta_2^2 - 4 theta_1 + 2.
double true_mse(std::span<const double> theta);

// The MSE-minimizing line, y = (2/3) x.
Weights bayes_optimal();

}  // namespace seldonian
