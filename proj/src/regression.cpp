#include "seldonian/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seldonian/bounds.hpp"
#include "seldonian/random.hpp"

namespace seldonian {

namespace {

struct Pairing {
  std::vector<std::size_t> type0;
  std::vector<std::size_t> type1;
  std::size_t count = 0;
};

Pairing pair_types(const Dataset& d) {
  Pairing p{d.indices_of_type(0), d.indices_of_type(1), 0};
  if (p.type0.empty() || p.type1.empty()) {
    throw ConstraintInfeasible("paired statistic needs both types present (m0=" +
                               std::to_string(p.type0.size()) +
                               ", m1=" + std::to_string(p.type1.size()) + ")");
  }
  p.count = std::min(p.type0.size(), p.type1.size());
  return p;
}

std::vector<double> negated(std::vector<double> z) {
  for (auto& v : z) v = -v;
  return z;
}

double hoeffding_predicted_ub(double z_mean, double delta, double range, std::size_t k) {
  const double half_width = range * std::sqrt(std::log(1.0 / (delta / 2.0)) / static_cast<double>(k));
  return std::max(z_mean + half_width, -z_mean + half_width);
}

double ttest_predicted_ub(double z_mean, double z_sd, double delta, std::size_t k) {
  const double half_width =
      2.0 * z_sd / std::sqrt(static_cast<double>(k)) * shared_t_table()(1.0 - delta / 2.0, k - 1);
  return std::max(z_mean + half_width, -z_mean + half_width);
}

// Why a partition cannot host the paired statistic, or empty if it can.
std::string partition_problem(const Dataset& part, const char* name, std::size_t min_pairs) {
  const auto pairs = std::min(part.count_type0(), part.count_type1());
  if (pairs >= min_pairs) return {};
  return std::string(name) + " has m0=" + std::to_string(part.count_type0()) +
         ", m1=" + std::to_string(part.count_type1()) + "; need at least " +
         std::to_string(min_pairs) + " pair(s)";
}

std::pair<Dataset, Dataset> partition(const Dataset& d, const SearchConfig& cfg) {
  if (cfg.shuffle) {
    Rng rng(cfg.seed);
    return d.shuffled(rng).split(cfg.candidate_fraction);
  }
  return d.split(cfg.candidate_fraction);
}

RegressionOutcome refuse(std::string why) {
  RegressionOutcome out;
  out.diagnostic = std::move(why);
  return out;
}

}  // namespace

std::vector<double> paired_error_diffs(std::span<const double> theta, const Dataset& d) {
  const auto p = pair_types(d);
  std::vector<double> z(p.count);
  for (std::size_t i = 0; i < p.count; ++i) {
    z[i] = prediction_error(theta, d, p.type0[i]) - prediction_error(theta, d, p.type1[i]);
  }
  return z;
}

std::vector<double> paired_prediction_diffs(std::span<const double> theta, const Dataset& d) {
  const auto p = pair_types(d);
  std::vector<double> z(p.count);
  for (std::size_t i = 0; i < p.count; ++i) {
    z[i] = predict(theta, d.x(p.type0[i])) - predict(theta, d.x(p.type1[i]));
  }
  return z;
}

PairedErrorMoments::PairedErrorMoments(const Dataset& d)
    : l_(d.feature_count()), rows_(d.size()) {
  const auto p = pair_types(d);
  pairs_ = p.count;
  const double m = static_cast<double>(rows_);

  gram_.assign(l_ * l_, 0.0);
  cross_.assign(l_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    auto x = d.x(i);
    const double y = d.y(i);
    for (std::size_t a = 0; a < l_; ++a) {
      cross_[a] += x[a] * y;
      for (std::size_t b = a; b < l_; ++b) gram_[a * l_ + b] += x[a] * x[b];
    }
    y_sq_ += y * y;
  }
  for (std::size_t a = 0; a < l_; ++a) {
    cross_[a] /= m;
    for (std::size_t b = a; b < l_; ++b) {
      gram_[a * l_ + b] /= m;
      gram_[b * l_ + a] = gram_[a * l_ + b];
    }
  }
  y_sq_ /= m;

  const std::size_t w = l_ + 1;
  auto pair_vector = [&](std::size_t i, std::vector<double>& v) {
    auto x0 = d.x(p.type0[i]);
    auto x1 = d.x(p.type1[i]);
    for (std::size_t a = 0; a < l_; ++a) v[a] = x0[a] - x1[a];
    v[l_] = d.y(p.type0[i]) - d.y(p.type1[i]);
  };
  std::vector<double> v(w);
  pair_mean_.assign(w, 0.0);
  for (std::size_t i = 0; i < pairs_; ++i) {
    pair_vector(i, v);
    for (std::size_t a = 0; a < w; ++a) pair_mean_[a] += v[a];
  }
  for (auto& a : pair_mean_) a /= static_cast<double>(pairs_);

  pair_cov_.assign(w * w, 0.0);
  if (pairs_ >= 2) {
    for (std::size_t i = 0; i < pairs_; ++i) {
      pair_vector(i, v);
      for (std::size_t a = 0; a < w; ++a) v[a] -= pair_mean_[a];
      for (std::size_t a = 0; a < w; ++a) {
        for (std::size_t b = a; b < w; ++b) pair_cov_[a * w + b] += v[a] * v[b];
      }
    }
    for (std::size_t a = 0; a < w; ++a) {
      for (std::size_t b = a; b < w; ++b) {
        pair_cov_[a * w + b] /= static_cast<double>(pairs_ - 1);
        pair_cov_[b * w + a] = pair_cov_[a * w + b];
      }
    }
  }
}

double PairedErrorMoments::mse(std::span<const double> theta) const {
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t a = 0; a < l_; ++a) {
    lin += theta[a] * cross_[a];
    for (std::size_t b = 0; b < l_; ++b) quad += theta[a] * gram_[a * l_ + b] * theta[b];
  }
  return std::max(0.0, quad - 2.0 * lin + y_sq_);
}

double PairedErrorMoments::z_mean(std::span<const double> theta) const {
  double s = -pair_mean_[l_];
  for (std::size_t a = 0; a < l_; ++a) s += theta[a] * pair_mean_[a];
  return s;
}

double PairedErrorMoments::z_stddev(std::span<const double> theta) const {
  if (pairs_ < 2) throw std::domain_error("PairedErrorMoments: need at least two pairs");
  const std::size_t w = l_ + 1;
  auto coef = [&](std::size_t a) { return a < l_ ? theta[a] : -1.0; };
  double var = 0.0;
  for (std::size_t a = 0; a < w; ++a) {
    for (std::size_t b = 0; b < w; ++b) var += coef(a) * pair_cov_[a * w + b] * coef(b);
  }
  return std::sqrt(std::max(0.0, var));
}

double hoeffding_candidate_objective(std::span<const double> theta, const Dataset& d1, double delta,
                                     double epsilon, double range, std::size_t k) {
  const auto z = paired_error_diffs(theta, d1);
  const double ub = std::max(predict_hoeffding_upper(z, range, delta / 2.0, k),
                             predict_hoeffding_upper(negated(z), range, delta / 2.0, k));
  if (ub <= epsilon) return sample_mse(theta, d1);
  return range * range + ub - epsilon;
}

double hoeffding_candidate_objective(std::span<const double> theta, const PairedErrorMoments& d1,
                                     double delta, double epsilon, double range, std::size_t k) {
  if (k == 0) throw std::domain_error("hoeffding_candidate_objective: k must be positive");
  const double ub = hoeffding_predicted_ub(d1.z_mean(theta), delta, range, k);
  if (ub <= epsilon) return d1.mse(theta);
  return range * range + ub - epsilon;
}

double hoeffding_safety_bound(std::span<const double> theta, const Dataset& d2, double delta,
                              double range) {
  const auto z = paired_error_diffs(theta, d2);
  return std::max(hoeffding_upper(z, range, delta / 2.0),
                  hoeffding_upper(negated(z), range, delta / 2.0));
}

RegressionOutcome ndlr(const Dataset& d, double delta, double epsilon, double range,
                       const SearchConfig& cfg) {
  auto [d1, d2] = partition(d, cfg);
  for (auto problem : {partition_problem(d1, "candidate partition", 1),
                       partition_problem(d2, "safety partition", 1)}) {
    if (!problem.empty()) return refuse(problem);
  }

  const PairedErrorMoments moments(d1);
  const std::size_t k = d2.size();
  auto objective = [&](std::span<const double> theta) {
    return hoeffding_candidate_objective(theta, moments, delta, epsilon, range, k);
  };
  const auto search = minimize_candidate(objective, d.feature_count(), cfg);

  RegressionOutcome out;
  out.candidate = search.theta;
  out.evaluations = search.evaluations;
  out.search_converged = search.converged;
  const double bound = hoeffding_safety_bound(search.theta, d2, delta, range);
  out.safety_bounds = {bound};
  if (bound <= epsilon) {
    out.solution = search.theta;
  } else {
    out.diagnostic = "safety test failed: bound " + std::to_string(bound) + " > epsilon";
  }
  return out;
}

double ttest_candidate_objective(std::span<const double> theta, const Dataset& d1, double delta,
                                 double epsilon, std::size_t k, double lambda, double range) {
  const auto z = paired_error_diffs(theta, d1);
  const double ub = std::max(predict_t_upper(z, delta / 2.0, k),
                             predict_t_upper(negated(z), delta / 2.0, k));
  if (ub <= epsilon) return sample_mse(theta, d1) + lambda * sample_mean(z);
  return range * range + ub + (lambda - 1.0) * epsilon;
}

double ttest_candidate_objective(std::span<const double> theta, const PairedErrorMoments& d1,
                                 double delta, double epsilon, std::size_t k, double lambda,
                                 double range) {
  if (k < 2) throw std::domain_error("ttest_candidate_objective: k must be at least 2");
  const double z_mean = d1.z_mean(theta);
  const double ub = ttest_predicted_ub(z_mean, d1.z_stddev(theta), delta, k);
  if (ub <= epsilon) return d1.mse(theta) + lambda * z_mean;
  return range * range + ub + (lambda - 1.0) * epsilon;
}

double ttest_safety_bound(std::span<const double> theta, const Dataset& d2, double delta) {
  const auto z = paired_error_diffs(theta, d2);
  return std::max(t_upper(z, delta / 2.0), t_upper(negated(z), delta / 2.0));
}

double default_barrier_range(const Dataset& d1) {
  double biggest = 0.0;
  for (std::size_t i = 0; i < d1.size(); ++i) biggest = std::max(biggest, std::fabs(d1.y(i)));
  return 3.0 * biggest;
}

RegressionOutcome qndlr(const Dataset& d, double delta, double epsilon, double lambda,
                        const SearchConfig& cfg, double range) {
  auto [d1, d2] = partition(d, cfg);
  for (auto problem : {partition_problem(d1, "candidate partition", 2),
                       partition_problem(d2, "safety partition", 2)}) {
    if (!problem.empty()) return refuse(problem);
  }
  if (range <= 0.0) range = default_barrier_range(d1);

  const PairedErrorMoments moments(d1);
  const std::size_t k = d2.size();
  auto objective = [&](std::span<const double> theta) {
    return ttest_candidate_objective(theta, moments, delta, epsilon, k, lambda, range);
  };
  const auto search = minimize_candidate(objective, d.feature_count(), cfg);

  RegressionOutcome out;
  out.candidate = search.theta;
  out.evaluations = search.evaluations;
  out.search_converged = search.converged;
  const double bound = ttest_safety_bound(search.theta, d2, delta);
  out.safety_bounds = {bound};
  if (bound <= epsilon) {
    out.solution = search.theta;
  } else {
    out.diagnostic = "safety test failed: bound " + std::to_string(bound) + " > epsilon";
  }
  return out;
}

std::vector<double> general_safety_bounds(std::span<const double> theta, const Dataset& d2,
                                          std::span<const ConstraintSpec> constraints) {
  std::vector<double> bounds;
  bounds.reserve(constraints.size());
  for (const auto& c : constraints) {
    const auto g = c.estimator(theta, d2);
    if (g.size() < 2) {
      throw std::domain_error("constraint '" + c.description + "' produced " +
                              std::to_string(g.size()) + " estimate(s) on the safety partition");
    }
    bounds.push_back(t_upper(g, c.delta));
  }
  return bounds;
}

RegressionOutcome quasi_seldonian_general(const Dataset& d,
                                          std::span<const ConstraintSpec> constraints,
                                          const UtilityEstimator& utility, const SearchConfig& cfg) {
  auto [d1, d2] = partition(d, cfg);
  if (d2.size() < 2) return refuse("safety partition has fewer than two rows");
  const std::size_t k = d2.size();
  const std::size_t dim = d.feature_count();
  const Weights start = cfg.initial_theta.empty() ? Weights(dim, 0.0) : cfg.initial_theta;

  // Estimators that cannot produce a usable vector on either partition make
  // both the search and the safety test meaningless.
  for (const auto& c : constraints) {
    for (const Dataset* part : {&d1, &d2}) {
      std::size_t n = 0;
      try {
        n = c.estimator(start, *part).size();
      } catch (const std::domain_error& e) {
        return refuse("constraint '" + c.description + "' is degenerate: " + e.what());
      }
      if (n < 2) {
        return refuse("constraint '" + c.description + "' yields " + std::to_string(n) +
                      " estimate(s) on a partition; need at least 2");
      }
    }
  }

  std::vector<double> quantiles;
  for (const auto& c : constraints) quantiles.push_back(shared_t_table()(1.0 - c.delta, k - 1));

  auto objective = [&](std::span<const double> theta) {
    double excess = 0.0;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const auto g = constraints[i].estimator(theta, d1);
      if (g.size() < 2) return std::numeric_limits<double>::infinity();
      const double predicted = sample_mean(g) + 2.0 * sample_stddev(g) /
                                                    std::sqrt(static_cast<double>(k)) * quantiles[i];
      excess += std::max(0.0, predicted);
    }
    if (excess > 0.0) return cfg.barrier + excess;
    return -utility(theta, d1);
  };
  const auto search = minimize_candidate(objective, dim, cfg);

  RegressionOutcome out;
  out.candidate = search.theta;
  out.evaluations = search.evaluations;
  out.search_converged = search.converged;
  try {
    out.safety_bounds = general_safety_bounds(search.theta, d2, constraints);
  } catch (const std::domain_error& e) {
    out.diagnostic = e.what();
    return out;
  }
  const bool safe = std::all_of(out.safety_bounds.begin(), out.safety_bounds.end(),
                                [](double b) { return b <= 0.0; });
  if (safe) {
    out.solution = search.theta;
  } else {
    out.diagnostic = "safety test failed for at least one constraint";
  }
  return out;
}

ConstraintSpec error_difference_constraint(double epsilon, double delta, bool upper) {
  const double sign = upper ? 1.0 : -1.0;
  return {[=](std::span<const double> theta, const Dataset& data) {
            auto z = paired_error_diffs(theta, data);
            for (auto& v : z) v = sign * v - epsilon;
            return z;
          },
          delta, upper ? "error difference <= eps" : "error difference >= -eps"};
}

ConstraintSpec prediction_difference_constraint(double epsilon, double delta, bool upper) {
  const double sign = upper ? 1.0 : -1.0;
  return {[=](std::span<const double> theta, const Dataset& data) {
            auto z = paired_prediction_diffs(theta, data);
            for (auto& v : z) v = sign * v - epsilon;
            return z;
          },
          delta, upper ? "prediction difference <= eps" : "prediction difference >= -eps"};
}

std::vector<ConstraintSpec> absolute_error_difference_constraints(double epsilon, double delta) {
  return {error_difference_constraint(epsilon, delta / 2.0, true),
          error_difference_constraint(epsilon, delta / 2.0, false)};
}

std::vector<ConstraintSpec> absolute_prediction_difference_constraints(double epsilon,
                                                                       double delta) {
  return {prediction_difference_constraint(epsilon, delta / 2.0, true),
          prediction_difference_constraint(epsilon, delta / 2.0, false)};
}

UtilityEstimator negative_mse_utility(double lambda) {
  return [lambda](std::span<const double> theta, const Dataset& data) {
    double value = -sample_mse(theta, data);
    if (lambda != 0.0) value -= lambda * sample_mean(paired_error_diffs(theta, data));
    return value;
  };
}

}  // namespace seldonian
