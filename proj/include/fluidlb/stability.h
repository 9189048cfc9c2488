#ifndef FLUIDLB_STABILITY_H_
#define FLUIDLB_STABILITY_H_

#include <optional>
#include <span>
#include <vector>

#include "fluidlb/common.h"
#include "fluidlb/network.h"
#include "fluidlb/static_opt.h"

namespace fluidlb {

// E = diag(a) - a a^T / (a^T 1) for a binary adjacency row a.
Matrix laplacian(std::span<const unsigned char> adjacency);

// Active adjacency row of frontend i (1 where x*_ij is above the activity
// threshold).
std::vector<unsigned char> active_adjacency(const Network& net, const StaticSolution& sol,
                                            int frontend);

// sum_i lambda_i eta_i E_i over the active arcs.
Matrix weighted_laplacian(const Network& net, const StaticSolution& sol,
                          std::span<const double> eta);

// Smallest eigenvalue above 1e-9 * (largest eigenvalue). With `connected`
// set, more than one (numerically) zero eigenvalue is a kDisconnected error.
double spectral_gap(const Matrix& weighted, bool connected);

// A connected piece of the active-arc graph. Backends without any active arc
// belong to no component.
struct ActiveComponent {
  std::vector<int> frontends;
  std::vector<int> backends;
};

std::vector<ActiveComponent> active_components(const Network& net,
                                               const StaticSolution& sol);

// Lower bound 1 / (|B| d(G)) on the spectral gap, where d(G) is the
// backend-to-backend diameter and passing through frontend i costs
// |B_i| / (lambda_i eta_i). Throws kDisconnected when the active graph over
// the served backends is not connected.
double diameter_bound(const Network& net, std::span<const int> active_arcs,
                      std::span<const double> eta);

// Left-hand side of the multi-frontend local stability condition for pivot
// c_hat. The active graph must be connected and c_hat >= max_j 1/l'_j(N*_j).
double multi_frontend_lhs(const Network& net, const StaticSolution& sol,
                          std::span<const double> eta, double c_hat);

// Same quantity restricted to one component. Components with a single
// backend have no routing dynamics and contribute 0.
double component_lhs(const Network& net, const StaticSolution& sol,
                     const ActiveComponent& comp, std::span<const double> eta,
                     double c_hat);

// Single-frontend condition: max_j 2 tau_1j eta lambda sigma_j / l'_j over
// the active backends.
double single_frontend_lhs(const Network& net, const StaticSolution& sol,
                           std::span<const double> eta);

// Pivot minimising component_lhs over [lo, 2 max(lo, max_i c_i)] with
// lo = max_j 1/l'_j: a 64-point grid, golden-section refinement around the
// best grid point, and the fallback max_i c_i when it is at least lo. lhs is not known to be unimodal in c_hat, so this is
// best effort.
double best_pivot(const Network& net, const StaticSolution& sol,
                  const ActiveComponent& comp, std::span<const double> eta);

struct CriticalStepSizes {
  std::vector<double> eta;     // eta_i / lambda_i constant
  std::vector<double> c_hat;   // per component
  double lhs = 0.0;            // condition value at eta (1 by construction)
  bool widened = false;        // see reference_step_sizes
};

// Step sizes proportional to lambda that put the condition exactly at 1,
// using each component's best pivot. Throws when no component has routing
// dynamics (every frontend pinned to a single backend).
CriticalStepSizes critical_step_sizes(const Network& net, const StaticSolution& sol);

// critical_step_sizes, except that when no component has routing dynamics
// (the condition then holds for every step size) it is evaluated as if every
// arc were active, and `widened` is set. Used to pick step sizes for
// simulations of such instances.
CriticalStepSizes reference_step_sizes(const Network& net, const StaticSolution& sol);

// Full condition value: max over components of component_lhs at each
// component's best pivot.
double stability_lhs(const Network& net, const StaticSolution& sol,
                     std::span<const double> eta);

struct StabilityReport {
  std::vector<Matrix> laplacians;       // E_i per frontend
  std::vector<ActiveComponent> components;
  std::vector<double> component_gap;    // NaN for single-backend components
  std::vector<double> component_c_hat;
  std::vector<double> component_lhs;
  double gap = 0.0;                     // smallest component gap
  double gap_lower_bound = 0.0;         // diameter bound (connected case)
  double lhs_multi = 0.0;
  std::optional<double> lhs_single;
  double c_hat = 0.0;                   // pivot of the first component
  std::vector<double> tau_hat;          // per backend; NaN when unserved
  std::vector<double> eta;
  std::vector<double> eta_crit;
  bool stable = false;                  // lhs_multi < 1
};

// With `eta` empty the critical step sizes are used.
StabilityReport stability_report(const Network& net, const StaticSolution& sol,
                                 std::span<const double> eta);

// Re f + 1 - w c Im f for f(tau) = e^{-2 i tau w} / (2 i tau w (i w (c - tau) + 1)).
// The single-frontend condition rests on this being non-negative for
// 0 < tau < c, w > 0.
double halfspace_margin(double c, double w, double tau);

}  // namespace fluidlb

#endif  // FLUIDLB_STABILITY_H_
