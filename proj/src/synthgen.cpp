#include "seldonian/synthgen.hpp"

#include <array>
#include <stdexcept>

#include "seldonian/random.hpp"

namespace seldonian {

namespace {

void require_line(std::span<const double> theta, const char* where) {
  if (theta.size() != 2) throw std::invalid_argument(std::string(where) + ": theta must be (slope, intercept)");
}

}  // namespace

Dataset gen_illustrative(const IllustrativeParams& params) {
  if (params.m == 0) throw std::invalid_argument("gen_illustrative: m must be >= 1");
  Rng rng(params.seed);
  Dataset d(2, true);
  d.reserve(params.m);
  for (std::size_t i = 0; i < params.m; ++i) {
    const int t = rng.bernoulli(0.5) ? 1 : 0;
    const double y = rng.normal(t == 0 ? 1.0 : -1.0, 1.0);
    const double x = y + rng.normal();
    const std::array<double, 2> features{x, 1.0};
    d.push_back(features, y, t);
  }
  return d;
}

// Moments used below: E[X|T=0] = 1, E[X|T=1] = -1, E[X] = E[Y] = 0,
// E[Y^2] = 2, E[X^2] = 3, E[XY] = 2.
double true_disc_stat(std::span<const double> theta) {
  require_line(theta, "true_disc_stat");
  const double err0 = theta[0] * 1.0 + theta[1] - 1.0;
  const double err1 = theta[0] * -1.0 + theta[1] + 1.0;
  return err0 - err1;
}

double true_mse(std::span<const double> theta) {
  require_line(theta, "true_mse");
  const double a = theta[0];
  const double b = theta[1];
  return 3.0 * a * a + b * b - 4.0 * a + 2.0;
}

Weights bayes_optimal() { return {2.0 / 3.0, 0.0}; }

}  // namespace seldonian
