#ifndef FLUIDLB_SIM_H_
#define FLUIDLB_SIM_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fluidlb/common.h"
#include "fluidlb/delay_buffer.h"
#include "fluidlb/network.h"
#include "fluidlb/simplex.h"
#include "fluidlb/static_opt.h"

namespace fluidlb {

enum class Policy {
  kDgd,   // delayed projected gradient descent
  kLw,    // least (delayed) workload
  kLl,    // least latency: tau + N / l(N)
  kGmsr,  // greatest marginal service rate l'(N)
};

const char* policy_name(Policy p);
// Throws a contract error for unknown names.
Policy parse_policy(const std::string& name);

struct SimConfig {
  double dt = 0.0;          // 0 selects min(1e-3, min tau / 50)
  double horizon = 100.0;   // seconds
  Policy policy = Policy::kDgd;
  std::vector<double> eta;  // per frontend; DGD only
  double clip = 4.0;        // gradients capped at clip * c_i (needs a solution)
  // Step x - eta * dt * g. When false, the undamped x - eta * g is used.
  bool scale_step_by_dt = true;
  // Length of the window for error_N, error_x and windowed_gap; 0 selects
  // 4 * max tau.
  double metric_window = 0.0;
  // Window length for the oscillation amplitude trace.
  double amplitude_window = 20.0;
  int max_trajectory_rows = 10'000;  // 0 disables the trajectory
};

// Value of the whole history for t <= 0.
struct InitialState {
  std::vector<double> workloads;
  Matrix routing;
};

struct TrajectoryRow {
  double t = 0.0;
  std::vector<double> workloads;
  Matrix routing;
  double inflight_total = 0.0;
};

struct Metrics {
  double dt = 0.0;
  double horizon = 0.0;
  std::int64_t steps = 0;
  double metric_window = 0.0;
  // Time averages of sum_j N_j + sum_ij N_ij.
  double average_total = 0.0;       // over [0, T]
  double window_average_total = 0.0;  // over the metric window
  double steady_average_total = 0.0;  // over [T/2, T]
  // The following need a StaticSolution and are NaN otherwise.
  double gap = 0.0;            // average_total / OPT - 1
  double windowed_gap = 0.0;   // window_average_total / OPT - 1
  double error_n = 0.0;        // time average of ||N - N*||_2 over the window
  double error_x = 0.0;        // time average of ||x - x*||_F over the window
  double max_abs_n_deviation = 0.0;  // sup_t ||N(t) - N*||_inf
  // max_j (max - min) / 2 of N_j over consecutive amplitude windows, in time
  // order and anchored at the horizon; the first window may be shorter.
  std::vector<double> window_amplitude;
  std::vector<double> final_workloads;
  Matrix final_routing;
  double final_inflight_total = 0.0;
  std::vector<TrajectoryRow> trajectory;
};

// Time-stepping state of one run. Owns its buffers; not thread-safe, but
// independent simulations may run concurrently over a shared Network.
class Simulation {
 public:
  Simulation(const Network& net, SimConfig config, const InitialState& init,
             const StaticSolution* solution = nullptr);

  double dt() const { return dt_; }
  double time() const { return static_cast<double>(step_) * dt_; }
  std::int64_t step_count() const { return step_; }
  const std::vector<double>& workloads() const { return n_; }
  const Matrix& routing() const { return x_; }
  // sum_ij N_ij: requests travelling on the arcs.
  double inflight_total() const;
  double inflight(int arc) const;

  // Delayed gradient 1 / l'_j(N_j(t - tau_ij)) + tau_ij of frontend i,
  // clipped when a solution is attached. Absent arcs are marked absent.
  MaskedVector gradient(int frontend) const;
  // Delayed workload N_j(t - tau_ij) seen by frontend i.
  double delayed_workload(int arc) const;

  // One explicit Euler step of the workloads followed by the routing update.
  // Throws kNumerical on NaN / infinity.
  void step();

 private:
  void route_dgd(Matrix& next) const;
  void route_greedy(Matrix& next) const;
  void recompute_inflight();

  const Network& net_;
  SimConfig config_;
  const StaticSolution* solution_;
  double dt_;
  std::int64_t step_ = 0;
  std::vector<double> n_;
  Matrix x_;
  std::vector<double> lag_;  // tau / dt per arc
  DelayBuffer n_history_;    // per backend
  DelayBuffer x_history_;    // per arc
  std::vector<double> inflight_;  // integral of x over [t - tau, t] in steps
  std::vector<unsigned char> masks_;
  mutable SimplexWorkspace workspace_;
  mutable std::vector<double> scratch_z_;
  mutable std::vector<double> scratch_out_;
  std::vector<double> arc_row_;
};

double default_dt(const Network& net);

// Throws a contract error unless dt > 0, dt < min tau / 10, the horizon is
// positive, eta is positive for DGD and the initial state is valid.
void validate_config(const Network& net, const SimConfig& config, const InitialState& init);

// Integrates to the horizon and collects metrics. `solution` is needed for
// the gap/error metrics and for gradient clipping.
Metrics run(const Network& net, const SimConfig& config, const InitialState& init,
            const StaticSolution* solution = nullptr);

InitialState equilibrium_state(const StaticSolution& sol);

}  // namespace fluidlb

#endif  // FLUIDLB_SIM_H_
