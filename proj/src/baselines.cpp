#include "seldonian/baselines.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace seldonian {

namespace {

// Sufficient statistics for sclr_objective: MSE is quadratic and the
// discrimination statistic is affine in theta.
class SclrMoments {
 public:
  explicit SclrMoments(const Dataset& d) : l_(d.feature_count()) {
    if (d.count_type0() == 0 || d.count_type1() == 0) {
      throw std::domain_error("sclr: both types must be present");
    }
    gram_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(l_), static_cast<Eigen::Index>(l_));
    cross_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(l_));
    disc_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(l_));
    const double n0 = static_cast<double>(d.count_type0());
    const double n1 = static_cast<double>(d.count_type1());
    for (std::size_t i = 0; i < d.size(); ++i) {
      const Eigen::Map<const Eigen::VectorXd> x(d.x(i).data(), static_cast<Eigen::Index>(l_));
      gram_.noalias() += x * x.transpose();
      cross_ += x * d.y(i);
      y_sq_ += d.y(i) * d.y(i);
      const double w = d.t(i) == 0 ? 1.0 / n0 : -1.0 / n1;
      disc_ += w * x;
      disc_offset_ += w * d.y(i);
    }
    const double m = static_cast<double>(d.size());
    gram_ /= m;
    cross_ /= m;
    y_sq_ /= m;
  }

  double operator()(std::span<const double> theta, double lambda) const {
    const Eigen::Map<const Eigen::VectorXd> t(theta.data(), static_cast<Eigen::Index>(l_));
    const double mse = std::max(0.0, t.dot(gram_ * t) - 2.0 * t.dot(cross_) + y_sq_);
    return mse + lambda * std::fabs(t.dot(disc_) - disc_offset_);
  }

 private:
  std::size_t l_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd cross_;
  Eigen::VectorXd disc_;
  double y_sq_ = 0.0;
  double disc_offset_ = 0.0;
};

}  // namespace

LeastSquaresFit least_squares(const Dataset& d) {
  if (d.empty()) throw std::domain_error("least_squares: empty dataset");
  const auto m = static_cast<Eigen::Index>(d.size());
  const auto l = static_cast<Eigen::Index>(d.feature_count());
  Eigen::MatrixXd design(m, l);
  Eigen::VectorXd target(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    auto x = d.x(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < l; ++j) design(i, j) = x[static_cast<std::size_t>(j)];
    target(i) = d.y(static_cast<std::size_t>(i));
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  const Eigen::VectorXd theta = cod.solve(target);

  LeastSquaresFit fit;
  fit.theta.assign(theta.data(), theta.data() + theta.size());
  fit.rank = static_cast<std::size_t>(cod.rank());
  fit.rank_deficient = cod.rank() < l;
  return fit;
}

double sample_disc_stat(std::span<const double> theta, const Dataset& d) {
  if (d.count_type0() == 0 || d.count_type1() == 0) {
    throw std::domain_error("sample_disc_stat: both types must be present");
  }
  double sum0 = 0.0;
  double sum1 = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double e = prediction_error(theta, d, i);
    (d.t(i) == 0 ? sum0 : sum1) += e;
  }
  return sum0 / static_cast<double>(d.count_type0()) - sum1 / static_cast<double>(d.count_type1());
}

double sclr_objective(std::span<const double> theta, const Dataset& d, double lambda) {
  return sample_mse(theta, d) + lambda * std::fabs(sample_disc_stat(theta, d));
}

Weights sclr(const Dataset& d, double lambda, const SearchConfig& cfg) {
  if (lambda < 0.0) throw std::domain_error("sclr: lambda must be non-negative");
  const SclrMoments moments(d);
  SearchConfig search = cfg;
  search.initial_theta = least_squares(d).theta;
  auto objective = [&](std::span<const double> theta) { return moments(theta, lambda); };
  return minimize_candidate(objective, d.feature_count(), search).theta;
}

}  // namespace seldonian
