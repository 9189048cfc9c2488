#ifndef FLUIDLB_RNG_H_
#define FLUIDLB_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

namespace fluidlb {

// Seedable generator with platform-independent output. The engine is
// std::mt19937_64 (fully specified by the standard); the distributions are
// implemented here because the standard library's are not portable.
//
// Streams: Rng(seed, stream) seeds the engine with SplitMix64 applied to
// seed and stream, so replication r of an experiment seeded with s always
// sees the same numbers regardless of thread scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal (Box-Muller, no caching).
  double normal();
  double exponential();
  // Knuth's multiplication method; fine for the small means used here.
  int poisson(double mean);
  double lognormal(double mu, double sigma);
  // Uniform point on the probability simplex of dimension n (normalised
  // exponentials).
  std::vector<double> simplex_point(int n);
  // Uniform point on the unit sphere in R^3.
  std::vector<double> sphere_point();

  static std::uint64_t splitmix64(std::uint64_t x);

 private:
  std::mt19937_64 engine_;
};

}  // namespace fluidlb

#endif  // FLUIDLB_RNG_H_
