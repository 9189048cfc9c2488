#include "fluidlb/stability.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <sstream>

#include "fluidlb/jacobi.h"

namespace fluidlb {
namespace {

constexpr double kZeroEigenRel = 1e-9;
constexpr double kPivotSlack = 1e-12;
constexpr int kPivotGrid = 64;

void check_eta(const Network& net, std::span<const double> eta) {
  if (static_cast<int>(eta.size()) != net.num_frontends()) {
    throw Error(ErrorKind::kContract, "step-size vector has wrong length");
  }
  for (double e : eta) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw Error(ErrorKind::kContract, "step sizes must be positive and finite");
    }
  }
}

// Weighted Laplacian restricted to the component's backends.
Matrix component_laplacian(const Network& net, const StaticSolution& sol,
                           const ActiveComponent& comp, std::span<const double> eta) {
  const int n = static_cast<int>(comp.backends.size());
  std::vector<int> local(net.num_backends(), -1);
  for (int k = 0; k < n; ++k) local[comp.backends[k]] = k;
  Matrix m(n, n);
  for (int i : comp.frontends) {
    std::vector<int> act;
    for (int j : net.backends_of(i)) {
      if (sol.is_active(net, i, j)) act.push_back(local[j]);
    }
    const double w = net.arrival(i) * eta[i];
    const double inv = 1.0 / act.size();
    for (int p : act) {
      m(p, p) += w;
      for (int q : act) m(p, q) -= w * inv;
    }
  }
  return m;
}

double inv_deriv(const Network& net, const StaticSolution& sol, int j) {
  return 1.0 / net.rate(j).deriv(sol.workloads[j]);
}

double pivot_floor(const Network& net, const StaticSolution& sol,
                   const ActiveComponent& comp) {
  double lo = 0.0;
  for (int j : comp.backends) lo = std::max(lo, inv_deriv(net, sol, j));
  return lo;
}

double max_multiplier(const StaticSolution& sol, const ActiveComponent& comp) {
  double hi = 0.0;
  for (int i : comp.frontends) hi = std::max(hi, sol.multipliers[i]);
  return hi;
}

}  // namespace

Matrix laplacian(std::span<const unsigned char> adjacency) {
  const int n = static_cast<int>(adjacency.size());
  int degree = 0;
  for (unsigned char a : adjacency) degree += a ? 1 : 0;
  if (degree == 0) throw Error(ErrorKind::kContract, "laplacian of an all-zero row");
  Matrix e(n, n);
  for (int p = 0; p < n; ++p) {
    if (!adjacency[p]) continue;
    e(p, p) = 1.0;
    for (int q = 0; q < n; ++q) {
      if (adjacency[q]) e(p, q) -= 1.0 / degree;
    }
  }
  return e;
}

std::vector<unsigned char> active_adjacency(const Network& net, const StaticSolution& sol,
                                            int frontend) {
  std::vector<unsigned char> a(net.num_backends(), 0);
  for (int j : net.backends_of(frontend)) a[j] = sol.is_active(net, frontend, j) ? 1 : 0;
  return a;
}

Matrix weighted_laplacian(const Network& net, const StaticSolution& sol,
                          std::span<const double> eta) {
  check_eta(net, eta);
  const int nb = net.num_backends();
  Matrix m(nb, nb);
  for (int i = 0; i < net.num_frontends(); ++i) {
    const Matrix e = laplacian(active_adjacency(net, sol, i));
    const double w = net.arrival(i) * eta[i];
    for (std::size_t k = 0; k < m.data().size(); ++k) m.data()[k] += w * e.data()[k];
  }
  return m;
}

double spectral_gap(const Matrix& weighted, bool connected) {
  const auto eig = symmetric_eigenvalues(weighted);
  if (eig.empty()) throw Error(ErrorKind::kContract, "spectral gap of an empty matrix");
  const double radius = std::max(std::fabs(eig.front()), std::fabs(eig.back()));
  const double floor = kZeroEigenRel * radius;
  int zeros = 0;
  for (double v : eig) zeros += v <= floor ? 1 : 0;
  if (zeros == static_cast<int>(eig.size())) {
    throw Error(ErrorKind::kDisconnected, "spectral gap undefined: matrix is zero");
  }
  if (connected && zeros > 1) {
    std::ostringstream os;
    os << "active graph is disconnected (" << zeros << " zero eigenvalues)";
    throw Error(ErrorKind::kDisconnected, os.str());
  }
  return eig[zeros];
}

std::vector<ActiveComponent> active_components(const Network& net,
                                               const StaticSolution& sol) {
  const int nf = net.num_frontends();
  const int nb = net.num_backends();
  // Union-find over frontends [0, nf) and backends [nf, nf + nb).
  std::vector<int> parent(nf + nb);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<unsigned char> served(nb, 0);
  for (int id : sol.active_arcs) {
    const Arc& a = net.arc(id);
    served[a.backend] = 1;
    parent[find(a.frontend)] = find(nf + a.backend);
  }
  std::vector<int> slot(nf + nb, -1);
  std::vector<ActiveComponent> comps;
  for (int v = 0; v < nf + nb; ++v) {
    if (v >= nf && !served[v - nf]) continue;
    const int root = find(v);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    if (v < nf) {
      comps[slot[root]].frontends.push_back(v);
    } else {
      comps[slot[root]].backends.push_back(v - nf);
    }
  }
  return comps;
}

double diameter_bound(const Network& net, std::span<const int> active_arcs,
                      std::span<const double> eta) {
  check_eta(net, eta);
  const int nb = net.num_backends();
  std::vector<std::vector<int>> act(net.num_frontends());
  std::vector<unsigned char> served(nb, 0);
  for (int id : active_arcs) {
    const Arc& a = net.arc(id);
    act[a.frontend].push_back(a.backend);
    served[a.backend] = 1;
  }
  const double inf = std::numeric_limits<double>::infinity();
  Matrix dist(nb, nb, inf);
  for (int j = 0; j < nb; ++j) dist(j, j) = 0.0;
  for (int i = 0; i < net.num_frontends(); ++i) {
    const double cost = act[i].size() / (net.arrival(i) * eta[i]);
    for (int p : act[i]) {
      for (int q : act[i]) {
        if (p != q) dist(p, q) = std::min(dist(p, q), cost);
      }
    }
  }
  for (int k = 0; k < nb; ++k) {
    for (int p = 0; p < nb; ++p) {
      for (int q = 0; q < nb; ++q) {
        dist(p, q) = std::min(dist(p, q), dist(p, k) + dist(k, q));
      }
    }
  }
  int count = 0;
  double diameter = 0.0;
  for (int p = 0; p < nb; ++p) {
    if (!served[p]) continue;
    ++count;
    for (int q = 0; q < nb; ++q) {
      if (served[q]) diameter = std::max(diameter, dist(p, q));
    }
  }
  if (!std::isfinite(diameter)) {
    throw Error(ErrorKind::kDisconnected, "active graph is disconnected");
  }
  if (count < 2) {
    throw Error(ErrorKind::kContract, "diameter bound needs at least two served backends");
  }
  return 1.0 / (count * diameter);
}

double component_lhs(const Network& net, const StaticSolution& sol,
                     const ActiveComponent& comp, std::span<const double> eta,
                     double c_hat) {
  check_eta(net, eta);
  if (comp.backends.size() < 2) return 0.0;
  const double floor = pivot_floor(net, sol, comp);
  if (!(c_hat >= floor - kPivotSlack)) {
    std::ostringstream os;
    os << "pivot " << c_hat << " is below max_j 1/l'_j = " << floor;
    throw Error(ErrorKind::kContract, os.str());
  }
  const double gap = spectral_gap(component_laplacian(net, sol, comp, eta), true);

  double eta_lambda = 0.0;
  double spread = 0.0;
  for (int i : comp.frontends) {
    const double w = net.arrival(i) * eta[i];
    eta_lambda += w;
    spread += w * std::fabs(c_hat - sol.multipliers[i]);
  }
  double latency_term = 0.0;
  double max_sigma = 0.0;
  for (int j : comp.backends) {
    const double n = sol.workloads[j];
    const double d = net.rate(j).deriv(n);
    const double sigma = net.rate(j).sigma(n);
    const double tau_hat = std::max(0.0, c_hat - 1.0 / d);
    latency_term = std::max(latency_term, tau_hat * sigma / d);
    max_sigma = std::max(max_sigma, sigma);
  }
  return 2.0 * eta_lambda * (latency_term + spread / gap * c_hat * max_sigma);
}

double multi_frontend_lhs(const Network& net, const StaticSolution& sol,
                          std::span<const double> eta, double c_hat) {
  const auto comps = active_components(net, sol);
  if (comps.size() != 1) {
    throw Error(ErrorKind::kDisconnected,
                "active graph has " + std::to_string(comps.size()) + " components");
  }
  return component_lhs(net, sol, comps.front(), eta, c_hat);
}

double single_frontend_lhs(const Network& net, const StaticSolution& sol,
                           std::span<const double> eta) {
  if (net.num_frontends() != 1) {
    throw Error(ErrorKind::kContract, "single-frontend condition needs exactly one frontend");
  }
  check_eta(net, eta);
  const double lambda = net.arrival(0);
  double worst = 0.0;
  for (int j : net.backends_of(0)) {
    if (!sol.is_active(net, 0, j)) continue;
    const double n = sol.workloads[j];
    const double value = 2.0 * net.latency(0, j) * eta[0] * lambda *
                         net.rate(j).sigma(n) / net.rate(j).deriv(n);
    worst = std::max(worst, value);
  }
  return worst;
}

double best_pivot(const Network& net, const StaticSolution& sol,
                  const ActiveComponent& comp, std::span<const double> eta) {
  const double lo = pivot_floor(net, sol, comp);
  const double fallback = max_multiplier(sol, comp);
  if (comp.backends.size() < 2) return fallback;
  // With every arc treated as active, idle backends can push the floor past
  // 2 max_i c_i; the range then becomes [lo, 2 lo].
  const double hi = 2.0 * std::max(fallback, lo);
  auto f = [&](double c) { return component_lhs(net, sol, comp, eta, c); };

  const double h = (hi - lo) / (kPivotGrid - 1);
  int best = 0;
  double best_value = f(lo);
  for (int k = 1; k < kPivotGrid; ++k) {
    const double v = f(lo + k * h);
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }

  // Golden-section search on the bracket around the best grid point.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo + std::max(best - 1, 0) * h;
  double b = lo + std::min(best + 1, kPivotGrid - 1) * h;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-12 * (1.0 + std::fabs(a)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  double pivot = lo + best * h;
  double value = best_value;
  const double mid = 0.5 * (a + b);
  if (const double v = f(mid); v < value) {
    value = v;
    pivot = mid;
  }
  if (fallback >= lo) {
    if (const double v = f(fallback); v < value) pivot = fallback;
  }
  return pivot;
}

double stability_lhs(const Network& net, const StaticSolution& sol,
                     std::span<const double> eta) {
  double worst = 0.0;
  for (const auto& comp : active_components(net, sol)) {
    const double pivot = best_pivot(net, sol, comp, eta);
    worst = std::max(worst, component_lhs(net, sol, comp, eta, pivot));
  }
  return worst;
}

CriticalStepSizes critical_step_sizes(const Network& net, const StaticSolution& sol) {
  const std::vector<double>& base = net.arrival();
  CriticalStepSizes out;
  double worst = 0.0;
  for (const auto& comp : active_components(net, sol)) {
    const double pivot = best_pivot(net, sol, comp, base);
    out.c_hat.push_back(pivot);
    worst = std::max(worst, component_lhs(net, sol, comp, base, pivot));
  }
  if (!(worst > 0.0)) {
    throw Error(ErrorKind::kContract,
                "no routing dynamics: every frontend uses a single backend");
  }
  out.eta.resize(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out.eta[i] = base[i] / worst;
  out.lhs = 0.0;
  const auto comps = active_components(net, sol);
  for (std::size_t k = 0; k < comps.size(); ++k) {
    out.lhs = std::max(out.lhs, component_lhs(net, sol, comps[k], out.eta, out.c_hat[k]));
  }
  return out;
}

CriticalStepSizes reference_step_sizes(const Network& net, const StaticSolution& sol) {
  bool pinned = true;
  for (const auto& comp : active_components(net, sol)) {
    pinned = pinned && comp.backends.size() < 2;
  }
  if (!pinned) return critical_step_sizes(net, sol);
  StaticSolution widened = sol;
  widened.active_arcs.resize(net.num_arcs());
  std::iota(widened.active_arcs.begin(), widened.active_arcs.end(), 0);
  CriticalStepSizes out = critical_step_sizes(net, widened);
  out.widened = true;
  return out;
}

StabilityReport stability_report(const Network& net, const StaticSolution& sol,
                                 std::span<const double> eta) {
  StabilityReport r;
  const CriticalStepSizes crit = critical_step_sizes(net, sol);
  r.eta_crit = crit.eta;
  r.eta = eta.empty() ? crit.eta : std::vector<double>(eta.begin(), eta.end());
  check_eta(net, r.eta);

  for (int i = 0; i < net.num_frontends(); ++i) {
    r.laplacians.push_back(laplacian(active_adjacency(net, sol, i)));
  }
  r.components = active_components(net, sol);
  r.tau_hat.assign(net.num_backends(), std::numeric_limits<double>::quiet_NaN());
  r.gap = std::numeric_limits<double>::infinity();
  for (const auto& comp : r.components) {
    const double pivot = best_pivot(net, sol, comp, r.eta);
    r.component_c_hat.push_back(pivot);
    const double value = component_lhs(net, sol, comp, r.eta, pivot);
    r.component_lhs.push_back(value);
    r.lhs_multi = std::max(r.lhs_multi, value);
    if (comp.backends.size() >= 2) {
      const double gap = spectral_gap(component_laplacian(net, sol, comp, r.eta), true);
      r.component_gap.push_back(gap);
      r.gap = std::min(r.gap, gap);
    } else {
      r.component_gap.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    for (int j : comp.backends) r.tau_hat[j] = pivot - inv_deriv(net, sol, j);
  }
  if (!r.component_c_hat.empty()) r.c_hat = r.component_c_hat.front();
  if (!std::isfinite(r.gap)) r.gap = std::numeric_limits<double>::quiet_NaN();
  if (r.components.size() == 1 && r.components.front().backends.size() >= 2) {
    r.gap_lower_bound = diameter_bound(net, sol.active_arcs, r.eta);
  } else {
    r.gap_lower_bound = std::numeric_limits<double>::quiet_NaN();
  }
  if (net.num_frontends() == 1) r.lhs_single = single_frontend_lhs(net, sol, r.eta);
  r.stable = r.lhs_multi < 1.0;
  return r;
}

double halfspace_margin(double c, double w, double tau) {
  if (!(tau > 0.0) || !(tau < c)) {
    throw Error(ErrorKind::kContract, "halfspace margin needs 0 < tau < c");
  }
  if (!(w > 0.0)) throw Error(ErrorKind::kContract, "halfspace margin needs w > 0");
  using C = std::complex<double>;
  const C i(0.0, 1.0);
  const C f = std::exp(-2.0 * tau * w * i) / (2.0 * tau * i * w * (i * w * (c - tau) + 1.0));
  return f.real() + 1.0 - w * c * f.imag();
}

}  // namespace fluidlb
