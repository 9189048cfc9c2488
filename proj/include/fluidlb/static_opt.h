#ifndef FLUIDLB_STATIC_OPT_H_
#define FLUIDLB_STATIC_OPT_H_

#include <functional>
#include <vector>

#include "fluidlb/common.h"
#include "fluidlb/network.h"

namespace fluidlb {

// Optimal static routing: minimise the steady-state number of requests
//   sum_j N_j + sum_(i,j) lambda_i x_ij tau_ij
// subject to lambda-weighted flow balance at each backend and x_i in the
// simplex of frontend i.
struct StaticSolution {
  Matrix routing;                  // x*, frontends x backends
  std::vector<double> workloads;   // N*
  std::vector<double> multipliers; // c_i, seconds
  double opt_value = 0.0;          // requests
  std::vector<int> active_arcs;    // arc ids with x*_ij > activity threshold
  int iterations = 0;
  double stationarity = 0.0;       // final tangent-cone gradient norm

  bool is_active(const Network& net, int frontend, int backend) const;
};

struct SolverOptions {
  double tolerance = 1e-9;        // on the tangent-cone projected gradient
  int max_iterations = 1'000'000;
  double activity_threshold = 1e-7;
  double armijo = 1e-4;
  // Called with (iteration, objective) after every accepted step.
  std::function<void(int, double)> on_iterate;
};

// N_j(x) = l_j^{-1}(sum_i lambda_i x_ij). Throws kOverload naming the
// backend when an inflow reaches capacity.
std::vector<double> equilibrium_workloads(const Network& net, const Matrix& routing);

struct ReducedObjective {
  double value = 0.0;
  Matrix gradient;  // lambda_i (1 / l'_j(N_j(x)) + tau_ij), 0 off the arcs
  std::vector<double> workloads;
};

ReducedObjective reduced_objective(const Network& net, const Matrix& routing);

// Projected gradient with Armijo backtracking on the reduced problem.
// Throws kInfeasible when no feasible starting point is found and
// kNonConvergence (with the final residual) when the budget runs out.
StaticSolution solve_static(const Network& net, const SolverOptions& options = {});

// Builds a StaticSolution (workloads, multipliers, objective, active set)
// for a given routing matrix.
StaticSolution make_solution(const Network& net, const Matrix& routing,
                             double activity_threshold = 1e-7);

// Largest violation of the first-order conditions: |1/l'_j + tau_ij - c_i|
// on active arcs and max(0, c_i - (1/l'_j + tau_ij)) on inactive arcs.
double kkt_residual(const Network& net, const StaticSolution& sol);

// Norm of the tangent-cone projection of the negative gradient, summed in
// quadrature over frontends. Zero exactly at stationary points.
double projected_gradient_norm(const Network& net, const Matrix& routing,
                               const Matrix& gradient);

}  // namespace fluidlb

#endif  // FLUIDLB_STATIC_OPT_H_
