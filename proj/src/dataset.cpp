#include "seldonian/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "seldonian/random.hpp"

namespace seldonian {

void Dataset::push_back(std::span<const double> x, double y, int t) {
  if (x.size() != feature_count_) {
    throw std::invalid_argument("Dataset: expected " + std::to_string(feature_count_) +
                                " features, got " + std::to_string(x.size()));
  }
  if (t != 0 && t != 1) throw std::invalid_argument("Dataset: type must be 0 or 1");
  if (!std::isfinite(y) || !std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("Dataset: non-finite value");
  }
  features_.insert(features_.end(), x.begin(), x.end());
  y_.push_back(y);
  t_.push_back(t);
  count1_ += static_cast<std::size_t>(t);
}

void Dataset::reserve(std::size_t n) {
  features_.reserve(n * feature_count_);
  y_.reserve(n);
  t_.reserve(n);
}

LabeledPoint Dataset::point(std::size_t i) const {
  auto xs = x(i);
  return LabeledPoint{{xs.begin(), xs.end()}, y_[i], t_[i]};
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw std::out_of_range("Dataset::slice");
  Dataset out(feature_count_, has_intercept_);
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) out.push_back(x(i), y_[i], t_[i]);
  return out;
}

std::pair<Dataset, Dataset> Dataset::split(double fraction) const {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("Dataset::split: fraction must lie in (0,1)");
  }
  const auto n1 = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(size())));
  return {slice(0, n1), slice(n1, size())};
}

Dataset Dataset::shuffled(Rng& rng) const {
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Fisher-Yates driven by Rng so the permutation is portable.
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  Dataset out(feature_count_, has_intercept_);
  out.reserve(size());
  for (auto i : order) out.push_back(x(i), y_[i], t_[i]);
  return out;
}

Dataset Dataset::with_flipped_types() const {
  Dataset out(feature_count_, has_intercept_);
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(x(i), y_[i], 1 - t_[i]);
  return out;
}

std::vector<std::size_t> Dataset::indices_of_type(int type) const {
  std::vector<std::size_t> out;
  out.reserve(type == 1 ? count_type1() : count_type0());
  for (std::size_t i = 0; i < size(); ++i) {
    if (t_[i] == type) out.push_back(i);
  }
  return out;
}

double predict(std::span<const double> theta, std::span<const double> x) {
  if (theta.size() != x.size()) {
    throw std::invalid_argument("predict: weight length " + std::to_string(theta.size()) +
                                " does not match feature length " + std::to_string(x.size()));
  }
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += theta[j] * x[j];
  return s;
}

double prediction_error(std::span<const double> theta, const Dataset& d, std::size_t i) {
  return predict(theta, d.x(i)) - d.y(i);
}

double sample_mse(std::span<const double> theta, const Dataset& d) {
  if (d.empty()) throw std::domain_error("sample_mse: empty dataset");
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double e = prediction_error(theta, d, i);
    s += e * e;
  }
  return s / static_cast<double>(d.size());
}

}  // namespace seldonian
