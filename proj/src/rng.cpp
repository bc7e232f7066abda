#include "scadascope/rng.hpp"

#include <cmath>
#include <numbers>

namespace scadascope {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(splitmix64(seed ^ (stream * 0x9e3779b97f4a7c15ULL))) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal(double mean, double stddev) {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential(double mean) { return -std::log(1.0 - uniform()) * mean; }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) return 0;
  const auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  return v < n ? v : n - 1;
}

}  // namespace scadascope
