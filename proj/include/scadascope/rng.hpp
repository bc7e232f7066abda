#pragma once

#include <cstdint>
#include <random>

namespace scadascope {

/// Seeded generator used by the synthesizer. The engine is mt19937_64, seeded
/// with splitmix64(seed ^ stream * golden) so every independent process in a
/// scenario (each field device, each peripheral) draws from its own stream and
/// the draws of one process never depend on how many draws another made.
/// Distributions are written out here rather than taken from <random> because
/// the standard library leaves their algorithms unspecified:
///   uniform     53 high bits of one draw, scaled to [0, 1)
///   normal      Box-Muller, cosine branch only (one normal per two uniforms)
///   exponential -ln(1 - u) * mean
///   below(n)    floor(uniform * n)
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  double uniform();
  double normal(double mean, double stddev);
  double exponential(double mean);
  std::uint64_t below(std::uint64_t n);
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace scadascope
