#pragma once
// Quasi-Seldonian batch reinforcement learning over distributions of policies.
//
// Policies are points p in a 2-D box; a solution is a uniform distribution
// over an axis-aligned sub-box of the behavior distribution's support. Each
// logged episode records the sampled policy, its primary return and one
// return per behavioral constraint. A candidate is safe for constraint j when
// a t lower bound on its importance-weighted r_j return is at least the t
// upper bound of the behavior's own r_j return.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace seldonian {

class Rng;

using Policy = std::array<double, 2>;

class BoxDistribution {
 public:
  // Throws std::invalid_argument unless lower < upper in both dimensions.
  BoxDistribution(Policy lower, Policy upper);

  const Policy& lower() const { return lower_; }
  const Policy& upper() const { return upper_; }
  double volume() const;
  // Closed box membership.
  bool contains(const Policy& p) const;
  bool contains(const BoxDistribution& inner) const;

  friend bool operator==(const BoxDistribution&, const BoxDistribution&) = default;

 private:
  Policy lower_;
  Policy upper_;
};

// 1/volume inside the closed box, 0 outside.
double box_pdf(const BoxDistribution& mu, const Policy& p);

// Behavior probability mass of the candidate's support: intersection volume
// over the behavior box's volume.
double overlap_mass(const BoxDistribution& candidate, const BoxDistribution& behavior);

// Blood glucose conversion: bg' = bg / 18.018018 (mg/dL to mmol/L).
inline constexpr double kMgPerDlPerMmol = 18.018018;

// Penalizes both low and high glucose; low readings twice as hard.
double reward_r(double bg_mg_dl);
// Penalizes low glucose only.
double reward_r1(double bg_mg_dl);

struct EpisodeRecord {
  Policy policy{};
  double ret = 0.0;
  std::vector<double> constraint_returns;
};

/// Parameters of the toy glucose environment.
///
/// One episode is one day with `samples_per_day` glucose readings in mmol/L:
///   bg'_k = base + slope_p1 * p1 + slope_p2 * (p2 - 1/2) + noise_sd * N(0,1).
/// p1 plays the role of the carbohydrate ratio (low p1 means more insulin,
/// hence low glucose) and p2 the correction factor. The admissible box
/// [0,1]^2 is a normalized stand-in for CR in [8.5, 11] and CF in [10, 15].
/// The episode's primary return is the sum of reward_r over readings and its
/// single constraint return the sum of reward_r1.
struct ToyEnvironmentParams {
  double base = 5.0;
  double slope_p1 = 4.0;
  double slope_p2 = 0.5;
  double noise_sd = 1.0;
  std::size_t samples_per_day = 3;
};

class ToyEnvironment {
 public:
  explicit ToyEnvironment(ToyEnvironmentParams params = {});

  const ToyEnvironmentParams& params() const { return params_; }
  const BoxDistribution& admissible() const { return admissible_; }

  double mean_glucose_mmol(const Policy& p) const;
  // p1 at which the mean reading crosses 6 mmol/L for a given p2; below it
  // hypoglycemia dominates.
  double hypoglycemia_threshold_p1(double p2 = 0.5) const;

  // Throws std::domain_error if p lies outside the admissible box.
  EpisodeRecord episode(const Policy& p, Rng& rng) const;

  // Closed-form expectations of the episode returns at a fixed policy.
  double expected_return(const Policy& p) const;
  double expected_constraint_return(const Policy& p) const;

  // Expectations under a uniform box distribution (tensor Gauss-Legendre
  // quadrature of the closed forms).
  double expected_return(const BoxDistribution& mu) const;
  double expected_constraint_return(const BoxDistribution& mu) const;

  // m episodes, each from a fresh policy drawn from `behavior`.
  std::vector<EpisodeRecord> sample_batch(const BoxDistribution& behavior, std::size_t m,
                                          Rng& rng) const;

 private:
  ToyEnvironmentParams params_;
  BoxDistribution admissible_;
};

class RLProblem {
 public:
  // Throws std::invalid_argument if there are no candidates, a candidate's
  // support is not inside the behavior's, or a delta is outside (0,1).
  RLProblem(BoxDistribution behavior, std::vector<BoxDistribution> candidates,
            std::vector<double> deltas);

  const BoxDistribution& behavior() const { return behavior_; }
  const std::vector<BoxDistribution>& candidates() const { return candidates_; }
  const std::vector<double>& deltas() const { return deltas_; }
  std::size_t candidate_count() const { return candidates_.size(); }
  std::size_t constraint_count() const { return deltas_.size(); }
  // c_i for each candidate.
  double overlap(std::size_t i) const { return overlaps_[i]; }

 private:
  BoxDistribution behavior_;
  std::vector<BoxDistribution> candidates_;
  std::vector<double> deltas_;
  std::vector<double> overlaps_;
};

struct RLOutcome {
  // Chosen candidate (0-based); empty means No Solution Found.
  std::optional<std::size_t> chosen;
  std::vector<bool> safe;
  // Threshold each constraint's lower bounds were compared against.
  std::vector<double> thresholds;
  // Predicted primary return per candidate (NaN without in-support episodes).
  std::vector<double> estimated_returns;

  bool found() const { return chosen.has_value(); }
};

// Level used by each of the l + 1 t-tests of a constraint: delta / (l + 1).
double per_test_confidence(double delta, std::size_t candidate_count);

// t upper bound on the behavior's mean return for each constraint.
std::vector<double> behavior_thresholds(std::span<const EpisodeRecord> episodes,
                                        const RLProblem& problem);

RLOutcome quasi_seldonian_rl(std::span<const EpisodeRecord> episodes, const RLProblem& problem);

// Same selection rule with every candidate treated as safe; never refuses
// unless no candidate has an in-support episode.
RLOutcome unconstrained_rl(std::span<const EpisodeRecord> episodes, const RLProblem& problem);

// Safety test against user-supplied thresholds instead of the data-derived
// behavior bounds.
RLOutcome absolute_threshold_constraint(std::span<const EpisodeRecord> episodes,
                                        const RLProblem& problem,
                                        std::span<const double> thresholds);

using ReturnSelector = std::function<double(const EpisodeRecord&)>;
ReturnSelector primary_return();
ReturnSelector constraint_return(std::size_t j);

// One logged return with the candidate and behavior densities of its policy.
struct WeightedReturn {
  double candidate_density = 0.0;
  double behavior_density = 0.0;
  double value = 0.0;
};

// overlap * sum (candidate / behavior density) * value over entries with
// candidate density != 0, divided by the number of such entries. Works for
// any pair of densities (or mass functions). Throws std::domain_error when no
// entry is in the candidate's support or a supported entry has zero behavior
// density.
double in_support_importance_estimate(std::span<const WeightedReturn> samples, double overlap);

// The same estimator for box distributions: c * sum_k (mu_i(P_k) / mu_b(P_k)) * ret(H_k)
// divided by the number of episodes with mu_i(P_k) != 0.
double importance_estimate(std::span<const EpisodeRecord> episodes,
                           const BoxDistribution& candidate, const BoxDistribution& behavior,
                           const ReturnSelector& selector);

struct TilingConfig {
  // (width, height) as fractions of the behavior box's sides.
  std::vector<std::array<double, 2>> aspects{{0.5, 0.5}, {0.625, 0.4}, {0.4, 0.625}};
  // Offsets as fractions of the slack left in each dimension.
  std::vector<double> placements{0.0, 0.5, 1.0};
};

// Candidate boxes tiled over the behavior support: every aspect at every
// (x, y) placement. The defaults give 27 boxes of a quarter of the area.
std::vector<BoxDistribution> tiled_candidates(const BoxDistribution& behavior,
                                              const TilingConfig& tiling = {});

}  // namespace seldonian
