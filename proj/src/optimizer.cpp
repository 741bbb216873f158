#include "seldonian/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "seldonian/random.hpp"

namespace seldonian {

namespace {

struct Vertex {
  Weights x;
  double f;
};

class BudgetedObjective {
 public:
  BudgetedObjective(const Objective& f, std::size_t budget) : f_(f), budget_(budget) {}

  double operator()(const Weights& x) {
    ++used_;
    const double v = f_(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  }
  bool exhausted() const { return used_ >= budget_; }
  std::size_t used() const { return used_; }

 private:
  const Objective& f_;
  std::size_t budget_;
  std::size_t used_ = 0;
};

double diameter(const std::vector<Vertex>& simplex) {
  double d = 0.0;
  for (std::size_t i = 1; i < simplex.size(); ++i) {
    for (std::size_t j = 0; j < simplex[i].x.size(); ++j) {
      d = std::max(d, std::fabs(simplex[i].x[j] - simplex[0].x[j]));
    }
  }
  return d;
}

// Standard coefficients: reflection 1, expansion 2, contraction 1/2, shrink 1/2.
// Returns true on convergence.
bool nelder_mead(std::vector<Vertex>& simplex, BudgetedObjective& f, const SearchConfig& cfg) {
  const std::size_t n = simplex.size() - 1;
  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
  auto affine = [n](const Weights& a, const Weights& b, double t) {
    Weights out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = a[j] + t * (b[j] - a[j]);
    return out;
  };

  while (true) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    const double spread = simplex.back().f - simplex.front().f;
    if ((spread <= cfg.value_tolerance || !std::isfinite(spread)) &&
        diameter(simplex) <= cfg.step_tolerance) {
      return true;
    }
    if (diameter(simplex) <= cfg.step_tolerance * 1e-3) return true;
    if (f.exhausted()) return false;

    Weights centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i].x[j] / static_cast<double>(n);
    }
    Vertex& worst = simplex.back();

    Weights xr = affine(centroid, worst.x, -1.0);
    const double fr = f(xr);
    if (fr < simplex.front().f) {
      Weights xe = affine(centroid, worst.x, -2.0);
      const double fe = f(xe);
      worst = fe < fr ? Vertex{std::move(xe), fe} : Vertex{std::move(xr), fr};
      continue;
    }
    if (fr < simplex[n - 1].f) {
      worst = Vertex{std::move(xr), fr};
      continue;
    }
    // Outside contraction when the reflection beat the worst vertex, inside otherwise.
    const bool outside = fr < worst.f;
    Weights xc = outside ? affine(centroid, xr, 0.5) : affine(centroid, worst.x, 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : worst.f)) {
      worst = Vertex{std::move(xc), fc};
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      simplex[i].x = affine(simplex[0].x, simplex[i].x, 0.5);
      simplex[i].f = f(simplex[i].x);
    }
  }
}

std::vector<Vertex> axis_simplex(const Vertex& origin, double step, BudgetedObjective& f) {
  std::vector<Vertex> simplex{origin};
  for (std::size_t j = 0; j < origin.x.size(); ++j) {
    Weights x = origin.x;
    x[j] += step;
    const double v = f(x);
    simplex.push_back({std::move(x), v});
  }
  return simplex;
}

std::vector<Vertex> random_simplex(const Vertex& origin, double step, Rng& rng,
                                   BudgetedObjective& f) {
  std::vector<Vertex> simplex{origin};
  for (std::size_t j = 0; j < origin.x.size(); ++j) {
    Weights x = origin.x;
    for (auto& v : x) v += step * rng.uniform(-1.0, 1.0);
    x[j] += step;
    const double val = f(x);
    simplex.push_back({std::move(x), val});
  }
  return simplex;
}

}  // namespace

MinimizeResult minimize_candidate(const Objective& objective, std::size_t dimension,
                                  const SearchConfig& cfg) {
  if (dimension == 0) throw std::invalid_argument("minimize_candidate: dimension must be positive");
  if (cfg.max_evaluations == 0) throw std::invalid_argument("minimize_candidate: budget must be >= 1");
  Weights start = cfg.initial_theta.empty() ? Weights(dimension, 0.0) : cfg.initial_theta;
  if (start.size() != dimension) {
    throw std::invalid_argument("minimize_candidate: initial point has wrong length");
  }

  BudgetedObjective f(objective, cfg.max_evaluations);
  Vertex best{start, f(start)};
  if (f.exhausted()) return {best.x, best.f, f.used(), false};

  auto simplex = axis_simplex(best, cfg.initial_step, f);
  bool converged = nelder_mead(simplex, f, cfg);
  best = *std::min_element(simplex.begin(), simplex.end(),
                           [](const Vertex& a, const Vertex& b) { return a.f < b.f; });

  Rng rng(cfg.seed);
  double step = cfg.initial_step;
  for (std::size_t r = 0; r < cfg.restarts && !f.exhausted(); ++r) {
    step *= 0.5;
    auto restart = random_simplex(best, step, rng, f);
    const bool ok = nelder_mead(restart, f, cfg);
    const auto& candidate = *std::min_element(
        restart.begin(), restart.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    const double gain = best.f - candidate.f;
    if (candidate.f < best.f) best = candidate;
    converged = ok;
    if (ok && !(gain > cfg.value_tolerance)) break;
  }
  return {best.x, best.f, f.used(), converged};
}

}  // namespace seldonian
