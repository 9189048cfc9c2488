#include "fluidlb/rng.h"

#include <cmath>
#include <numbers>

#include "fluidlb/common.h"

namespace fluidlb {

std::uint64_t Rng::splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(~stream))) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  // 1 - u keeps the logarithm finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential() { return -std::log(1.0 - uniform()); }

int Rng::poisson(double mean) {
  if (!(mean >= 0.0) || mean > 500.0) {
    throw Error(ErrorKind::kContract, "poisson mean must lie in [0, 500]");
  }
  const double limit = std::exp(-mean);
  int k = 0;
  double p = uniform();
  while (p > limit) {
    ++k;
    p *= uniform();
  }
  return k;
}

double Rng::lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

std::vector<double> Rng::simplex_point(int n) {
  std::vector<double> y(n);
  double sum = 0.0;
  for (double& v : y) {
    v = exponential();
    sum += v;
  }
  for (double& v : y) v /= sum;
  return y;
}

std::vector<double> Rng::sphere_point() {
  for (;;) {
    std::vector<double> p{normal(), normal(), normal()};
    const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    if (r > 1e-12) {
      for (double& v : p) v /= r;
      return p;
    }
  }
}

}  // namespace fluidlb
