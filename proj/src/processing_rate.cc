#include "fluidlb/processing_rate.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fluidlb/common.h"

namespace fluidlb {
namespace {

constexpr double kLn2 = std::numbers::ln2;

void check_workload(double n) {
  if (!(n >= 0.0)) {
    std::ostringstream os;
    os << "processing rate evaluated at negative workload " << n;
    throw Error(ErrorKind::kContract, os.str());
  }
}

// N - log cosh(k - N), written so that no large terms cancel.
double shifted_log_cosh_gap(double k, double n) {
  const double u = k - n;
  if (u >= 0.0) return n - u - std::log1p(std::exp(-2.0 * u)) + kLn2;
  return k - std::log1p(std::exp(2.0 * u)) + kLn2;
}

}  // namespace

double log_cosh(double x) {
  const double ax = std::fabs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - kLn2;
}

ProcessingRate ProcessingRate::Sqrt(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorKind::kContract, "sqrt rate needs a > 0 and b > 0");
  }
  return ProcessingRate(Family::kSqrt, a, b);
}

ProcessingRate ProcessingRate::Hyperbolic(double servers,
                                          double seconds_per_request) {
  if (!(servers >= 1.0) || !(seconds_per_request > 0.0)) {
    throw Error(ErrorKind::kContract, "hyperbolic rate needs k >= 1 and s > 0");
  }
  return ProcessingRate(Family::kHyperbolic, servers, seconds_per_request);
}

ProcessingRate ProcessingRate::Affine(double slope) {
  if (!(slope >= 0.0)) {
    throw Error(ErrorKind::kContract, "affine rate needs slope >= 0");
  }
  return ProcessingRate(Family::kAffine, slope, 0.0);
}

double ProcessingRate::value(double n) const {
  check_workload(n);
  switch (family_) {
    case Family::kSqrt: {
      // sqrt(a + bN) - sqrt(a) without cancellation.
      const double root = std::sqrt(p0_ + p1_ * n);
      return p1_ * n / (root + std::sqrt(p0_));
    }
    case Family::kHyperbolic:
      return (log_cosh(p0_) + shifted_log_cosh_gap(p0_, n)) / (2.0 * p1_);
    case Family::kAffine:
      return p0_ * n;
  }
  return 0.0;
}

double ProcessingRate::deriv(double n) const {
  check_workload(n);
  switch (family_) {
    case Family::kSqrt:
      return p1_ / (2.0 * std::sqrt(p0_ + p1_ * n));
    case Family::kHyperbolic:
      // (1 + tanh(u)) / (2s) == 1 / (s (1 + e^{-2u})), accurate for u << 0.
      return 1.0 / (p1_ * (1.0 + std::exp(-2.0 * (p0_ - n))));
    case Family::kAffine:
      return p0_;
  }
  return 0.0;
}

double ProcessingRate::second_deriv(double n) const {
  check_workload(n);
  switch (family_) {
    case Family::kSqrt: {
      const double root = std::sqrt(p0_ + p1_ * n);
      return -p1_ * p1_ / (4.0 * root * root * root);
    }
    case Family::kHyperbolic: {
      // -sech^2(u) / (2s)
      const double e = std::exp(-2.0 * std::fabs(p0_ - n));
      return -2.0 * e / (p1_ * (1.0 + e) * (1.0 + e));
    }
    case Family::kAffine:
      return 0.0;
  }
  return 0.0;
}

double ProcessingRate::sigma(double n) const {
  check_workload(n);
  switch (family_) {
    case Family::kSqrt:
      return 1.0 / std::sqrt(p0_ + p1_ * n);
    case Family::kHyperbolic:
      return 2.0 * p1_ * std::exp(2.0 * (n - p0_));
    case Family::kAffine:
      return 0.0;
  }
  return 0.0;
}

std::optional<double> ProcessingRate::capacity() const {
  switch (family_) {
    case Family::kSqrt:
      return std::nullopt;
    case Family::kHyperbolic:
      // Exact limit; k/s is only its large-k approximation.
      return (p0_ + log_cosh(p0_) + kLn2) / (2.0 * p1_);
    case Family::kAffine:
      if (p0_ > 0.0) return std::nullopt;
      return 0.0;
  }
  return std::nullopt;
}

double ProcessingRate::inverse(double y) const {
  if (!(y >= 0.0)) {
    throw Error(ErrorKind::kContract, "rate inverse needs a non-negative throughput");
  }
  if (y == 0.0) return 0.0;
  if (const auto cap = capacity(); cap && y >= *cap) {
    std::ostringstream os;
    os << "infeasible throughput " << y << " >= capacity " << *cap;
    throw Error(ErrorKind::kInfeasible, os.str());
  }
  switch (family_) {
    case Family::kSqrt:
      // ((y + sqrt(a))^2 - a) / b
      return (y * y + 2.0 * y * std::sqrt(p0_)) / p1_;
    case Family::kAffine:
      return y / p0_;
    case Family::kHyperbolic:
      break;
  }

  // Hyperbolic: bisection bracket, then safeguarded Newton.
  double lo = 0.0;
  double hi = p0_ + p1_ * y * 10.0 + 50.0;
  for (int grow = 0; value(hi) < y; ++grow) {
    if (grow > 60) throw Error(ErrorKind::kInfeasible, "throughput too close to capacity");
    hi *= 2.0;
  }
  double n = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double r = value(n) - y;
    // Polished to rounding level: the static solver's line search compares
    // objectives built from these inverses.
    if (std::fabs(r) <= 4.0 * std::numeric_limits<double>::epsilon() * y) return n;
    if (r < 0.0) {
      lo = n;
    } else {
      hi = n;
    }
    const double d = deriv(n);
    double next = n - r / d;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == n || hi - lo <= 1e-15 * hi) return next;
    n = next;
  }
  return n;
}

}  // namespace fluidlb
