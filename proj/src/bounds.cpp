#include "seldonian/bounds.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace seldonian {

namespace {

void require_samples(std::span<const double> z, std::size_t min_count, const char* where) {
  if (z.size() < min_count) {
    throw std::domain_error(std::string(where) + ": need at least " + std::to_string(min_count) +
                            " samples, got " + std::to_string(z.size()));
  }
}

void require_probability(double delta, const char* where) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::domain_error(std::string(where) + ": confidence parameter must lie in (0,1)");
  }
}

// Continued fraction for the regularized incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Upper tail Pr(T > t) for t >= 0, computed without cancellation.
double t_upper_tail(double t, double nu) {
  const double x = nu / (nu + t * t);
  return 0.5 * incomplete_beta(nu / 2.0, 0.5, x);
}

double t_density(double t, double nu) {
  const double log_norm = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
                          0.5 * std::log(nu * std::numbers::pi);
  return std::exp(log_norm - (nu + 1.0) / 2.0 * std::log1p(t * t / nu));
}

// Acklam's rational approximation; only used to seed Newton's method.
double normal_quantile_guess(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

// Solves Pr(T > t) = tail for t > 0 by safeguarded Newton iteration.
double solve_upper_tail(double tail, double nu) {
  // Cornish-Fisher start from the normal quantile.
  const double zq = normal_quantile_guess(1.0 - tail);
  double t = zq + (zq * zq * zq + zq) / (4.0 * nu);
  if (!(t > 0.0) || !std::isfinite(t)) t = 1.0;

  double lo = 0.0;
  double hi = t;
  while (t_upper_tail(hi, nu) > tail) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return std::numeric_limits<double>::infinity();
  }

  for (int iter = 0; iter < 200; ++iter) {
    const double g = t_upper_tail(t, nu) - tail;  // decreasing in t
    if (g > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    const double slope = -t_density(t, nu);
    double next = t - g / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - t) <= 1e-14 * std::max(1.0, std::fabs(t))) return next;
    t = next;
  }
  return t;
}

void require_range(double range, const char* where) {
  if (!(range >= 0.0) || !std::isfinite(range)) {
    throw std::domain_error(std::string(where) + ": range must be finite and non-negative");
  }
}

}  // namespace

double sample_mean(std::span<const double> z) {
  require_samples(z, 1, "sample_mean");
  double sum = 0.0;
  for (double v : z) sum += v;
  return sum / static_cast<double>(z.size());
}

double sample_stddev(std::span<const double> z) {
  require_samples(z, 2, "sample_stddev");
  const double mean = sample_mean(z);
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(z.size() - 1));
}

double hoeffding_upper(std::span<const double> z, double range, double delta) {
  require_samples(z, 1, "hoeffding_upper");
  require_probability(delta, "hoeffding_upper");
  require_range(range, "hoeffding_upper");
  const double m = static_cast<double>(z.size());
  return sample_mean(z) + range * std::sqrt(std::log(1.0 / delta) / (2.0 * m));
}

double predict_hoeffding_upper(std::span<const double> z, double range, double delta,
                               std::size_t k) {
  require_samples(z, 1, "predict_hoeffding_upper");
  require_probability(delta, "predict_hoeffding_upper");
  require_range(range, "predict_hoeffding_upper");
  if (k == 0) throw std::domain_error("predict_hoeffding_upper: k must be positive");
  return sample_mean(z) + range * std::sqrt(std::log(1.0 / delta) / static_cast<double>(k));
}

double t_cdf(double t, std::size_t dof) {
  if (dof == 0) throw std::domain_error("t_cdf: degrees of freedom must be positive");
  const double nu = static_cast<double>(dof);
  if (t >= 0.0) return 1.0 - t_upper_tail(t, nu);
  return t_upper_tail(-t, nu);
}

double t_quantile(double confidence, std::size_t dof) {
  require_probability(confidence, "t_quantile");
  if (dof == 0) throw std::domain_error("t_quantile: degrees of freedom must be positive");
  if (confidence == 0.5) return 0.0;
  const double nu = static_cast<double>(dof);
  const double sign = confidence > 0.5 ? 1.0 : -1.0;
  const double tail = confidence > 0.5 ? 1.0 - confidence : confidence;

  // Closed forms for one and two degrees of freedom.
  if (dof == 1) return sign * std::tan(std::numbers::pi * (0.5 - tail));
  if (dof == 2) {
    const double p = 1.0 - tail;
    return sign * (2.0 * p - 1.0) / std::sqrt(2.0 * p * (1.0 - p));
  }
  return sign * solve_upper_tail(tail, nu);
}

double t_upper(std::span<const double> z, double delta) {
  require_samples(z, 2, "t_upper");
  require_probability(delta, "t_upper");
  const double m = static_cast<double>(z.size());
  return sample_mean(z) + sample_stddev(z) / std::sqrt(m) * t_quantile(1.0 - delta, z.size() - 1);
}

double t_lower(std::span<const double> z, double delta) {
  require_samples(z, 2, "t_lower");
  require_probability(delta, "t_lower");
  const double m = static_cast<double>(z.size());
  return sample_mean(z) - sample_stddev(z) / std::sqrt(m) * t_quantile(1.0 - delta, z.size() - 1);
}

double predict_t_upper(std::span<const double> z, double delta, std::size_t k) {
  require_samples(z, 2, "predict_t_upper");
  require_probability(delta, "predict_t_upper");
  if (k < 2) throw std::domain_error("predict_t_upper: k must be at least 2");
  const double kd = static_cast<double>(k);
  return sample_mean(z) + 2.0 * sample_stddev(z) / std::sqrt(kd) * t_quantile(1.0 - delta, k - 1);
}

double TQuantileTable::operator()(double confidence, std::size_t dof) const {
  const auto key = std::make_pair(confidence, dof);
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  const double value = t_quantile(confidence, dof);
  std::unique_lock lock(mutex_);
  cache_.emplace(key, value);
  return value;
}

std::size_t TQuantileTable::size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

TQuantileTable& shared_t_table() {
  static TQuantileTable table;
  return table;
}

}  // namespace seldonian
