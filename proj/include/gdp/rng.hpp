// Deterministic random numbers with named sub-streams.
//
// Every run of the toolkit derives all randomness from one 64-bit root seed.
// Independent consumers (graph construction, per-trajectory initial states,
// parameter init, ...) each open a named stream so that adding a consumer
// never shifts the draws seen by another. Streams are xoshiro256** generators
// seeded through splitmix64, which keeps results bit-identical across
// platforms (libstdc++ distributions are not portable, so uniform/normal
// sampling is done by hand).
#pragma once

#include <cstdint>
#include <string>

namespace gdp {

class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller (uses two uniforms per pair, caches one).
  double normal();
  double normal(double mean, double stddev);
  bool bernoulli(double p);
  // Uniform integer in [0, n).
  uint64_t below(uint64_t n);

 private:
  uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Derive the seed for a named sub-stream of `root`. Mixing is splitmix64 over
// the root seed combined with an FNV-1a hash of the name, so stream seeds
// are stable under reordering and insertion of other streams.
uint64_t stream_seed(uint64_t root, const std::string& name);
// Convenience for per-index streams ("traj/3" style).
uint64_t stream_seed(uint64_t root, const std::string& name, uint64_t index);

inline Rng stream_rng(uint64_t root, const std::string& name) {
  return Rng(stream_seed(root, name));
}
inline Rng stream_rng(uint64_t root, const std::string& name, uint64_t index) {
  return Rng(stream_seed(root, name, index));
}

}  // namespace gdp
