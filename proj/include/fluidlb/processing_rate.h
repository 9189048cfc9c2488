#ifndef FLUIDLB_PROCESSING_RATE_H_
#define FLUIDLB_PROCESSING_RATE_H_

#include <optional>

namespace fluidlb {

// Throughput of a backend as a function of its workload, l(N), in
// requests/second. Two parametric families are supported:
//
//   sqrt:        l(N) = sqrt(a + b N) - sqrt(a)
//   hyperbolic:  l(N) = (N + log cosh(k) - log cosh(k - N)) / (2 s)
//
// plus an affine family l(N) = r N used only by tests (r = 0 gives a
// backend that never drains).
//
// All families satisfy l(0) = 0, l' > 0 (except affine r = 0), l'' <= 0.
// Instances are immutable values.
class ProcessingRate {
 public:
  enum class Family { kSqrt, kHyperbolic, kAffine };

  static ProcessingRate Sqrt(double a, double b);
  static ProcessingRate Hyperbolic(double servers, double seconds_per_request);
  static ProcessingRate Affine(double slope);

  Family family() const { return family_; }
  double a() const { return p0_; }
  double b() const { return p1_; }
  double servers() const { return p0_; }
  double service_time() const { return p1_; }
  double slope() const { return p0_; }

  // l(N). Throws a contract error for N < 0.
  double value(double n) const;
  // l'(N) and l''(N).
  double deriv(double n) const;
  double second_deriv(double n) const;
  // Curvature -l''(N) / l'(N)^2 (seconds per request/second).
  double sigma(double n) const;

  // Workload N >= 0 with l(N) = y. Throws kInfeasible when y is at or above
  // capacity.
  double inverse(double y) const;

  // l(infinity); nullopt when unbounded.
  std::optional<double> capacity() const;

  bool operator==(const ProcessingRate&) const = default;

 private:
  ProcessingRate(Family family, double p0, double p1)
      : family_(family), p0_(p0), p1_(p1) {}

  Family family_;
  double p0_;
  double p1_;
};

// Overflow-free log(cosh(x)).
double log_cosh(double x);

}  // namespace fluidlb

#endif  // FLUIDLB_PROCESSING_RATE_H_
