#include "fluidlb/simplex.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "fluidlb/common.h"

namespace fluidlb {
namespace {

constexpr double kMembershipTol = 1e-9;
constexpr double kDriftTol = 1e-12;

void check_sizes(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c) {
    throw Error(ErrorKind::kContract, "simplex projection: size mismatch");
  }
}

}  // namespace

MaskedVector MaskedVector::dense(std::vector<double> values) {
  MaskedVector m;
  m.present.assign(values.size(), 1);
  m.values = std::move(values);
  return m;
}

void SimplexWorkspace::project_simplex(std::span<const double> z,
                                       std::span<const unsigned char> present,
                                       std::span<double> out) {
  check_sizes(z.size(), present.size(), out.size());
  sorted_.clear();
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (present[j]) sorted_.push_back(z[j]);
  }
  if (sorted_.empty()) {
    throw Error(ErrorKind::kContract, "simplex projection of an all-absent vector");
  }
  std::sort(sorted_.begin(), sorted_.end(), std::greater<double>());

  // Largest rho with u_rho - (sum_{k<=rho} u_k - 1) / rho > 0.
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted_.size(); ++k) {
    cumsum += sorted_[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (sorted_[k] - t > 0.0) theta = t;
  }

  double sum = 0.0;
  int positive = 0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    out[j] = present[j] ? std::max(z[j] - theta, 0.0) : 0.0;
    sum += out[j];
    if (out[j] > 0.0) ++positive;
  }
  const double drift = sum - 1.0;
  if (drift != 0.0 && std::fabs(drift) <= kDriftTol && positive > 0) {
    const double shift = drift / positive;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (out[j] > 0.0 && out[j] > shift) out[j] -= shift;
    }
  }
}

void SimplexWorkspace::project_tangent_cone(std::span<const double> z,
                                            std::span<const double> x,
                                            std::span<const unsigned char> present,
                                            std::span<double> out) {
  check_sizes(z.size(), x.size(), present.size());
  check_sizes(z.size(), out.size(), present.size());

  double x_sum = 0.0;
  double total = 0.0;
  int count = 0;
  int interior = 0;
  order_.clear();
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!present[j]) continue;
    if (!(x[j] >= -kMembershipTol)) {
      throw Error(ErrorKind::kContract, "tangent cone: x has a negative entry");
    }
    x_sum += x[j];
    total += z[j];
    ++count;
    if (x[j] > 0.0) {
      ++interior;
    } else {
      order_.push_back(static_cast<int>(j));
    }
  }
  if (count == 0 || !(std::fabs(x_sum - 1.0) <= kMembershipTol) || interior == 0) {
    throw Error(ErrorKind::kContract, "tangent cone: x is not in the simplex");
  }

  // Zero coordinates by ascending z, lowest index first among ties.
  std::sort(order_.begin(), order_.end(), [&](int a, int b) {
    return z[a] < z[b] || (z[a] == z[b] && a < b);
  });

  // Drop the smallest pinned candidate while it sits below the running mean.
  std::size_t dropped = 0;
  while (dropped < order_.size()) {
    const double beta = total / count;
    const int j = order_[dropped];
    if (z[j] >= beta) break;
    total -= z[j];
    --count;
    ++dropped;
  }
  const double beta = total / count;

  for (std::size_t j = 0; j < z.size(); ++j) out[j] = present[j] ? z[j] - beta : 0.0;
  for (std::size_t k = 0; k < dropped; ++k) out[order_[k]] = 0.0;

  double sum = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) sum += out[j];
  if (sum != 0.0 && std::fabs(sum) <= kDriftTol) {
    const double shift = sum / interior;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (present[j] && x[j] > 0.0) out[j] -= shift;
    }
  }
}

void project_tangent_cone(std::span<const double> z, std::span<const double> x,
                          std::span<const unsigned char> present,
                          std::span<double> out) {
  SimplexWorkspace ws;
  ws.project_tangent_cone(z, x, present, out);
}

std::vector<double> project_tangent_cone(const MaskedVector& z,
                                         std::span<const double> x) {
  std::vector<double> out(z.values.size());
  project_tangent_cone(z.values, x, z.present, out);
  return out;
}

void project_simplex(std::span<const double> z,
                     std::span<const unsigned char> present,
                     std::span<double> out) {
  SimplexWorkspace ws;
  ws.project_simplex(z, present, out);
}

std::vector<double> project_simplex(const MaskedVector& z) {
  std::vector<double> out(z.values.size());
  project_simplex(z.values, z.present, out);
  return out;
}

}  // namespace fluidlb
