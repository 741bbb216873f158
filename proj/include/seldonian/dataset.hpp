#pragma once
// Supervised samples (x, y, t) with a binary type attribute t.
//
// Features are stored row-major in one buffer. When `has_intercept()` is true
// the last feature of every row is the constant 1 appended at ingestion, so a
// weight vector theta expresses theta_1 x_1 + ... + theta_l.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace seldonian {

class Rng;

using Weights = std::vector<double>;

struct LabeledPoint {
  std::vector<double> x;
  double y = 0.0;
  int t = 0;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t feature_count, bool has_intercept)
      : feature_count_(feature_count), has_intercept_(has_intercept) {}

  // Throws std::invalid_argument on width mismatch, non-finite values or t not in {0,1}.
  void push_back(std::span<const double> x, double y, int t);
  void push_back(const LabeledPoint& p) { push_back(p.x, p.y, p.t); }
  void reserve(std::size_t n);

  std::size_t size() const { return y_.size(); }
  bool empty() const { return y_.empty(); }
  std::size_t feature_count() const { return feature_count_; }
  bool has_intercept() const { return has_intercept_; }
  std::size_t count_type0() const { return size() - count1_; }
  std::size_t count_type1() const { return count1_; }

  std::span<const double> x(std::size_t i) const {
    return {features_.data() + i * feature_count_, feature_count_};
  }
  double y(std::size_t i) const { return y_[i]; }
  int t(std::size_t i) const { return t_[i]; }
  LabeledPoint point(std::size_t i) const;

  // Rows [begin, end) in their original order.
  Dataset slice(std::size_t begin, std::size_t end) const;

  // Deterministic prefix split: the first floor(fraction * m) rows form the
  // first part, the rest the second.
  std::pair<Dataset, Dataset> split(double fraction) const;

  Dataset shuffled(Rng& rng) const;
  Dataset with_flipped_types() const;

  // Row indices of each type, in dataset order.
  std::vector<std::size_t> indices_of_type(int type) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t feature_count_ = 0;
  bool has_intercept_ = true;
  std::size_t count1_ = 0;
  std::vector<double> features_;
  std::vector<double> y_;
  std::vector<int> t_;
};

double predict(std::span<const double> theta, std::span<const double> x);

// theta^T x_i - y_i
double prediction_error(std::span<const double> theta, const Dataset& d, std::size_t i);

// (1/m) sum (theta^T x_i - y_i)^2
double sample_mse(std::span<const double> theta, const Dataset& d);

}  // namespace seldonian
