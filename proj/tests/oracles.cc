#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fluidlb::oracle {

std::vector<double> tangent_cone(std::span<const double> z, std::span<const double> x,
                                 std::span<const unsigned char> present) {
  const std::size_t n = z.size();
  if (n > 12) throw std::invalid_argument("oracle dimension too large");
  std::vector<int> zeros;
  for (std::size_t j = 0; j < n; ++j) {
    if (present[j] && x[j] == 0.0) zeros.push_back(static_cast<int>(j));
  }
  std::vector<double> best(n, 0.0);
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << zeros.size()); ++mask) {
    std::vector<unsigned char> pinned(n, 0);
    for (std::size_t k = 0; k < zeros.size(); ++k) {
      if (mask & (1u << k)) pinned[zeros[k]] = 1;
    }
    double sum = 0.0;
    int free = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (present[j] && !pinned[j]) {
        sum += z[j];
        ++free;
      }
    }
    if (free == 0) continue;
    const double mean = sum / free;
    std::vector<double> v(n, 0.0);
    bool feasible = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (!present[j] || pinned[j]) continue;
      v[j] = z[j] - mean;
      if (x[j] == 0.0 && v[j] < 0.0) feasible = false;
    }
    if (!feasible) continue;
    double dist = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (present[j]) dist += (v[j] - z[j]) * (v[j] - z[j]);
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = v;
    }
  }
  return best;
}

std::vector<double> simplex(std::span<const double> z, std::span<const unsigned char> present) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!present[j]) continue;
    lo = std::min(lo, z[j] - 1.0);
    hi = std::max(hi, z[j]);
  }
  auto mass = [&](double theta) {
    double s = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (present[j]) s += std::max(z[j] - theta, 0.0);
    }
    return s;
  };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > 1.0 ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  std::vector<double> out(z.size(), 0.0);
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (present[j]) out[j] = std::max(z[j] - theta, 0.0);
  }
  return out;
}

double inverse_by_bisection(const ProcessingRate& rate, double y) {
  double lo = 0.0;
  double hi = 1.0;
  while (rate.value(hi) < y) {
    hi *= 2.0;
    if (hi > 1e12) throw std::domain_error("throughput out of range");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // adjacent doubles
    (rate.value(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double objective(const Network& net, const Matrix& routing) {
  double total = 0.0;
  for (int j = 0; j < net.num_backends(); ++j) {
    double inflow = 0.0;
    for (int i = 0; i < net.num_frontends(); ++i) inflow += net.arrival(i) * routing(i, j);
    const auto cap = net.rate(j).capacity();
    if (cap && inflow >= *cap) return std::numeric_limits<double>::infinity();
    total += inverse_by_bisection(net.rate(j), inflow);
  }
  for (const Arc& a : net.arcs()) {
    total += net.arrival(a.frontend) * routing(a.frontend, a.backend) * a.latency;
  }
  return total;
}

GridResult grid_search_1x2(const Network& net, double spacing) {
  const int points = static_cast<int>(std::lround(1.0 / spacing));
  GridResult best{0.0, std::numeric_limits<double>::infinity()};
  Matrix x(1, 2);
  for (int k = 0; k <= points; ++k) {
    x(0, 0) = static_cast<double>(k) / points;
    x(0, 1) = 1.0 - x(0, 0);
    const double v = objective(net, x);
    if (v < best.value) best = {x(0, 0), v};
  }
  return best;
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

std::vector<double> eigenvalues_3x3(const Matrix& m) {
  const double p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
  const double q = (m(0, 0) + m(1, 1) + m(2, 2)) / 3.0;
  const double p2 = (m(0, 0) - q) * (m(0, 0) - q) + (m(1, 1) - q) * (m(1, 1) - q) +
                    (m(2, 2) - q) * (m(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  if (p == 0.0) return {q, q, q};
  Matrix b(3, 3);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) b(r, c) = (m(r, c) - (r == c ? q : 0.0)) / p;
  }
  const double det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                     b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                     b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  const double r = std::clamp(det / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double e2 = 3.0 * q - e1 - e3;
  std::vector<double> out{e1, e2, e3};
  std::sort(out.begin(), out.end());
  return out;
}

double halfspace_margin(double c, double w, double tau) {
  // numerator cos(2 tau w) - i sin(2 tau w); denominator
  // 2 tau i w (1 + i w (c - tau)) = -2 tau w^2 (c - tau) + i 2 tau w.
  const double nr = std::cos(2.0 * tau * w);
  const double ni = -std::sin(2.0 * tau * w);
  const double dr = -2.0 * tau * w * w * (c - tau);
  const double di = 2.0 * tau * w;
  const double den = dr * dr + di * di;
  const double re = (nr * dr + ni * di) / den;
  const double im = (ni * dr - nr * di) / den;
  return re + 1.0 - w * c * im;
}

double trapezoid(const std::function<double(double)>& f, double a, double b, int pieces) {
  const double h = (b - a) / pieces;
  double s = 0.5 * (f(a) + f(b));
  for (int k = 1; k < pieces; ++k) s += f(a + k * h);
  return s * h;
}

}  // namespace fluidlb::oracle
