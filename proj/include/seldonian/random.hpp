#pragma once
// Reproducible random streams.
//
// Generator: MT19937-64 (std::mt19937_64, whose output sequence is fixed by
// the C++ standard). Uniforms take the top 53 bits: u = (x >> 11) * 2^-53.
// Normals use the Box-Muller transform on (1 - u1, u2), emitting the cosine
// branch first and caching the sine branch for the next call.
// Sub-streams for trial i of a run seeded with s are seeded with
// splitmix64(s + (i + 1) * 0x9E3779B97F4A7C15).

#include <cstdint>
#include <optional>
#include <random>

namespace seldonian {

std::uint64_t splitmix64(std::uint64_t x);

// Seed for the independent stream of job `index` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t next_u64() { return engine_(); }

  Rng split(std::uint64_t index) { return Rng(derive_seed(next_u64(), index)); }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

}  // namespace seldonian
