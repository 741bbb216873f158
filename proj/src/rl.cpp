#include "seldonian/rl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "seldonian/bounds.hpp"
#include "seldonian/random.hpp"

namespace seldonian {

namespace {

constexpr double kTargetMmol = 6.0;

struct Quadrature {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre rule by Newton iteration on P_n.
Quadrature gauss_legendre(std::size_t n) {
  Quadrature q{std::vector<double>(n), std::vector<double>(n)};
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      dp = nd * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  return q;
}

const Quadrature& box_rule() {
  static const Quadrature rule = gauss_legendre(48);
  return rule;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// E[(B - a)^2 1{B < a}] for B ~ N(mean, sd^2).
double expected_low_square(double mean, double sd) {
  if (sd == 0.0) return mean < kTargetMmol ? (mean - kTargetMmol) * (mean - kTargetMmol) : 0.0;
  const double z = (kTargetMmol - mean) / sd;
  return sd * sd * ((1.0 + z * z) * normal_cdf(z) + z * normal_pdf(z));
}

template <typename F>
double integrate_box(const BoxDistribution& mu, F&& f) {
  const auto& q = box_rule();
  const double hx = 0.5 * (mu.upper()[0] - mu.lower()[0]);
  const double hy = 0.5 * (mu.upper()[1] - mu.lower()[1]);
  const double cx = 0.5 * (mu.upper()[0] + mu.lower()[0]);
  const double cy = 0.5 * (mu.upper()[1] + mu.lower()[1]);
  double total = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    for (std::size_t j = 0; j < q.nodes.size(); ++j) {
      total += q.weights[i] * q.weights[j] * f(Policy{cx + hx * q.nodes[i], cy + hy * q.nodes[j]});
    }
  }
  // Average over the box: the weights sum to 4.
  return total / 4.0;
}

void validate_episodes(std::span<const EpisodeRecord> episodes, const RLProblem& problem) {
  if (episodes.size() < 2) throw std::domain_error("need at least two episodes");
  for (const auto& e : episodes) {
    if (e.constraint_returns.size() != problem.constraint_count()) {
      throw std::domain_error("episode has " + std::to_string(e.constraint_returns.size()) +
                              " constraint returns; problem has " +
                              std::to_string(problem.constraint_count()));
    }
    if (!(box_pdf(problem.behavior(), e.policy) > 0.0)) {
      throw std::domain_error("episode policy lies outside the behavior support");
    }
  }
}

double predicted_performance(std::span<const EpisodeRecord> episodes, const RLProblem& problem,
                             std::size_t i) {
  const auto& candidate = problem.candidates()[i];
  const bool any_support = std::any_of(episodes.begin(), episodes.end(), [&](const EpisodeRecord& e) {
    return box_pdf(candidate, e.policy) != 0.0;
  });
  if (!any_support) return std::numeric_limits<double>::quiet_NaN();
  return importance_estimate(episodes, candidate, problem.behavior(), primary_return());
}

// Shared body of the RL selection rule. With `thresholds` empty every
// candidate is kept; otherwise candidate i is safe when, for every
// constraint j, its importance-weighted t lower bound is >= thresholds[j].
RLOutcome select_candidate(std::span<const EpisodeRecord> episodes, const RLProblem& problem,
                           std::span<const double> thresholds, bool constrained) {
  const std::size_t l = problem.candidate_count();
  RLOutcome out;
  out.thresholds.assign(thresholds.begin(), thresholds.end());
  out.safe.assign(l, true);
  out.estimated_returns.resize(l);

  for (std::size_t i = 0; i < l && constrained; ++i) {
    const auto& candidate = problem.candidates()[i];
    const double c = problem.overlap(i);
    for (std::size_t j = 0; j < problem.constraint_count(); ++j) {
      std::vector<double> rho;
      for (const auto& e : episodes) {
        const double density = box_pdf(candidate, e.policy);
        if (density != 0.0) {
          rho.push_back(c * density / box_pdf(problem.behavior(), e.policy) *
                        e.constraint_returns[j]);
        }
      }
      // A single weighted return has no sample deviation, so it cannot
      // certify anything either.
      if (rho.size() < 2 ||
          t_lower(rho, per_test_confidence(problem.deltas()[j], l)) < thresholds[j]) {
        out.safe[i] = false;
        break;
      }
    }
  }

  bool have_best = false;
  double best = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    out.estimated_returns[i] = predicted_performance(episodes, problem, i);
    if (!out.safe[i] || std::isnan(out.estimated_returns[i])) continue;
    if (!have_best || out.estimated_returns[i] > best) {
      best = out.estimated_returns[i];
      out.chosen = i;
      have_best = true;
    }
  }
  return out;
}

}  // namespace

BoxDistribution::BoxDistribution(Policy lower, Policy upper) : lower_(lower), upper_(upper) {
  for (std::size_t d = 0; d < 2; ++d) {
    if (!(lower_[d] < upper_[d]) || !std::isfinite(lower_[d]) || !std::isfinite(upper_[d])) {
      throw std::invalid_argument("BoxDistribution: need lower < upper in every dimension");
    }
  }
}

double BoxDistribution::volume() const {
  return (upper_[0] - lower_[0]) * (upper_[1] - lower_[1]);
}

bool BoxDistribution::contains(const Policy& p) const {
  return p[0] >= lower_[0] && p[0] <= upper_[0] && p[1] >= lower_[1] && p[1] <= upper_[1];
}

bool BoxDistribution::contains(const BoxDistribution& inner) const {
  return contains(inner.lower()) && contains(inner.upper());
}

double box_pdf(const BoxDistribution& mu, const Policy& p) {
  return mu.contains(p) ? 1.0 / mu.volume() : 0.0;
}

double overlap_mass(const BoxDistribution& candidate, const BoxDistribution& behavior) {
  double area = 1.0;
  for (std::size_t d = 0; d < 2; ++d) {
    const double lo = std::max(candidate.lower()[d], behavior.lower()[d]);
    const double hi = std::min(candidate.upper()[d], behavior.upper()[d]);
    area *= std::max(0.0, hi - lo);
  }
  return area / behavior.volume();
}

double reward_r(double bg_mg_dl) {
  const double dev = bg_mg_dl / kMgPerDlPerMmol - kTargetMmol;
  return dev < 0.0 ? -dev * dev / 5.0 : -dev * dev / 10.0;
}

double reward_r1(double bg_mg_dl) {
  const double dev = bg_mg_dl / kMgPerDlPerMmol - kTargetMmol;
  return dev < 0.0 ? -dev * dev / 5.0 : 0.0;
}

ToyEnvironment::ToyEnvironment(ToyEnvironmentParams params)
    : params_(params), admissible_({0.0, 0.0}, {1.0, 1.0}) {
  if (params_.samples_per_day == 0) throw std::invalid_argument("ToyEnvironment: samples_per_day must be >= 1");
  if (params_.noise_sd < 0.0) throw std::invalid_argument("ToyEnvironment: noise_sd must be >= 0");
}

double ToyEnvironment::mean_glucose_mmol(const Policy& p) const {
  return params_.base + params_.slope_p1 * p[0] + params_.slope_p2 * (p[1] - 0.5);
}

double ToyEnvironment::hypoglycemia_threshold_p1(double p2) const {
  return (kTargetMmol - params_.base - params_.slope_p2 * (p2 - 0.5)) / params_.slope_p1;
}

EpisodeRecord ToyEnvironment::episode(const Policy& p, Rng& rng) const {
  if (!admissible_.contains(p)) throw std::domain_error("ToyEnvironment: policy outside the admissible box");
  const double mean = mean_glucose_mmol(p);
  EpisodeRecord rec{p, 0.0, {0.0}};
  for (std::size_t k = 0; k < params_.samples_per_day; ++k) {
    const double bg = kMgPerDlPerMmol * (mean + params_.noise_sd * rng.normal());
    rec.ret += reward_r(bg);
    rec.constraint_returns[0] += reward_r1(bg);
  }
  return rec;
}

double ToyEnvironment::expected_return(const Policy& p) const {
  const double mean = mean_glucose_mmol(p);
  const double sd = params_.noise_sd;
  const double low = expected_low_square(mean, sd);
  const double high = sd * sd + (mean - kTargetMmol) * (mean - kTargetMmol) - low;
  return static_cast<double>(params_.samples_per_day) * (-low / 5.0 - std::max(0.0, high) / 10.0);
}

double ToyEnvironment::expected_constraint_return(const Policy& p) const {
  return static_cast<double>(params_.samples_per_day) *
         (-expected_low_square(mean_glucose_mmol(p), params_.noise_sd) / 5.0);
}

double ToyEnvironment::expected_return(const BoxDistribution& mu) const {
  return integrate_box(mu, [this](const Policy& p) { return expected_return(p); });
}

double ToyEnvironment::expected_constraint_return(const BoxDistribution& mu) const {
  return integrate_box(mu, [this](const Policy& p) { return expected_constraint_return(p); });
}

std::vector<EpisodeRecord> ToyEnvironment::sample_batch(const BoxDistribution& behavior,
                                                        std::size_t m, Rng& rng) const {
  std::vector<EpisodeRecord> out;
  out.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    const Policy p{rng.uniform(behavior.lower()[0], behavior.upper()[0]),
                   rng.uniform(behavior.lower()[1], behavior.upper()[1])};
    out.push_back(episode(p, rng));
  }
  return out;
}

RLProblem::RLProblem(BoxDistribution behavior, std::vector<BoxDistribution> candidates,
                     std::vector<double> deltas)
    : behavior_(behavior), candidates_(std::move(candidates)), deltas_(std::move(deltas)) {
  if (candidates_.empty()) throw std::invalid_argument("RLProblem: need at least one candidate");
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    if (!behavior_.contains(candidates_[i])) {
      throw std::invalid_argument("RLProblem: candidate " + std::to_string(i) +
                                  " is not supported inside the behavior distribution");
    }
    overlaps_.push_back(overlap_mass(candidates_[i], behavior_));
  }
  for (double d : deltas_) {
    if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("RLProblem: deltas must lie in (0,1)");
  }
}

double per_test_confidence(double delta, std::size_t candidate_count) {
  return delta / static_cast<double>(candidate_count + 1);
}

std::vector<double> behavior_thresholds(std::span<const EpisodeRecord> episodes,
                                        const RLProblem& problem) {
  validate_episodes(episodes, problem);
  std::vector<double> beta;
  for (std::size_t j = 0; j < problem.constraint_count(); ++j) {
    std::vector<double> r(episodes.size());
    for (std::size_t k = 0; k < episodes.size(); ++k) r[k] = episodes[k].constraint_returns[j];
    beta.push_back(t_upper(r, per_test_confidence(problem.deltas()[j], problem.candidate_count())));
  }
  return beta;
}

RLOutcome quasi_seldonian_rl(std::span<const EpisodeRecord> episodes, const RLProblem& problem) {
  const auto beta = behavior_thresholds(episodes, problem);
  return select_candidate(episodes, problem, beta, true);
}

RLOutcome unconstrained_rl(std::span<const EpisodeRecord> episodes, const RLProblem& problem) {
  validate_episodes(episodes, problem);
  return select_candidate(episodes, problem, {}, false);
}

RLOutcome absolute_threshold_constraint(std::span<const EpisodeRecord> episodes,
                                        const RLProblem& problem,
                                        std::span<const double> thresholds) {
  validate_episodes(episodes, problem);
  if (thresholds.size() != problem.constraint_count()) {
    throw std::domain_error("absolute_threshold_constraint: need one threshold per constraint");
  }
  return select_candidate(episodes, problem, thresholds, true);
}

ReturnSelector primary_return() {
  return [](const EpisodeRecord& e) { return e.ret; };
}

ReturnSelector constraint_return(std::size_t j) {
  return [j](const EpisodeRecord& e) { return e.constraint_returns.at(j); };
}

double in_support_importance_estimate(std::span<const WeightedReturn> samples, double overlap) {
  double weighted = 0.0;
  std::size_t in_support = 0;
  for (const auto& s : samples) {
    if (s.candidate_density == 0.0) continue;
    if (s.behavior_density == 0.0) throw std::domain_error("importance estimate: support mismatch");
    weighted += s.candidate_density / s.behavior_density * s.value;
    ++in_support;
  }
  if (in_support == 0) throw std::domain_error("importance estimate: no in-support episodes");
  return overlap * weighted / static_cast<double>(in_support);
}

double importance_estimate(std::span<const EpisodeRecord> episodes,
                           const BoxDistribution& candidate, const BoxDistribution& behavior,
                           const ReturnSelector& selector) {
  std::vector<WeightedReturn> samples;
  samples.reserve(episodes.size());
  for (const auto& e : episodes) {
    samples.push_back({box_pdf(candidate, e.policy), box_pdf(behavior, e.policy), selector(e)});
  }
  return in_support_importance_estimate(samples, overlap_mass(candidate, behavior));
}

std::vector<BoxDistribution> tiled_candidates(const BoxDistribution& behavior,
                                              const TilingConfig& tiling) {
  const double width = behavior.upper()[0] - behavior.lower()[0];
  const double height = behavior.upper()[1] - behavior.lower()[1];
  std::vector<BoxDistribution> out;
  for (const auto& [fw, fh] : tiling.aspects) {
    const double w = fw * width;
    const double h = fh * height;
    for (double ax : tiling.placements) {
      for (double ay : tiling.placements) {
        const Policy lo{behavior.lower()[0] + ax * (width - w), behavior.lower()[1] + ay * (height - h)};
        // Clamp so rounding never pushes a tile outside the behavior box.
        const Policy hi{std::min(lo[0] + w, behavior.upper()[0]), std::min(lo[1] + h, behavior.upper()[1])};
        out.emplace_back(lo, hi);
      }
    }
  }
  return out;
}

}  // namespace seldonian
