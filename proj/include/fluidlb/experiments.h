#ifndef FLUIDLB_EXPERIMENTS_H_
#define FLUIDLB_EXPERIMENTS_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fluidlb/network.h"
#include "fluidlb/rng.h"
#include "fluidlb/sim.h"
#include "fluidlb/static_opt.h"

namespace fluidlb {

struct ExperimentParams {
  double mu_f = 2.0;      // Poisson mean of the frontend count
  double mu_b = 2.0;      // Poisson mean of the backend count
  double tau_max = 1.0;   // seconds
  double rho = 0.9;       // utilisation, in (0, 1)
  std::vector<double> alphas{0.5};  // multipliers of the critical step sizes
  int replications = 10;
  double horizon = 100.0;
  std::uint64_t seed = 7;
  double dt = 0.0;        // 0 selects the simulator default
  double lognormal_sigma = 0.5;
  // Latencies are floored at this fraction of tau_max so that dt stays
  // reasonable for nearly co-located nodes.
  double min_latency_fraction = 0.05;
  double init_weight = 0.1;  // weight of the random point in the initial state
  int threads = 0;           // 0: FLUIDLB_THREADS, else hardware concurrency
};

// Throws kContract for out-of-range parameters.
void validate_params(const ExperimentParams& params);

// Complete bipartite network with hyperbolic backends: max(1, Poisson(mu_f))
// frontends, max(2, Poisson(mu_b)) backends, k = max(1, Poisson(5)),
// lognormal s with mean 1, great-circle latencies scaled to tau_max and
// arrivals summing to rho times the total capacity.
Network generate_instance(const ExperimentParams& params, Rng& rng);

// (1 - w) (N*, x*) + w (N_rand, x_rand). Rows of x_rand are uniform on the
// simplex; N_rand_j is uniform on [0, 2 k_j] for hyperbolic backends and on
// [0, 2 max(N*_j, 1)] otherwise.
InitialState mixed_init(const Network& net, const StaticSolution& sol, Rng& rng,
                        double weight);

// RNG streams of replication r.
Rng instance_rng(std::uint64_t seed, int replication);
Rng init_rng(std::uint64_t seed, int replication);

bool converged(const Metrics& m, const StaticSolution& sol);

struct LocalStabilityRow {
  int replication = 0;
  double alpha = 0.0;
  int frontends = 0;
  int backends = 0;
  std::string error;  // empty on success
  double opt = 0.0;
  double lhs = 0.0;   // stability condition at the simulated step sizes
  double gap = 0.0;
  double error_n = 0.0;
  double error_x = 0.0;
  double steady_average_total = 0.0;
  bool converged = false;
};

struct LocalStabilitySummary {
  double alpha = 0.0;
  int runs = 0;
  int failures = 0;
  double mean_gap = 0.0;
  double mean_error_n = 0.0;
  double mean_error_x = 0.0;
  double converged_fraction = 0.0;  // over successful runs
};

// Per replication: generate, solve, take the critical step sizes
// (proportional to lambda), scale by each alpha and simulate from the mixed
// initial state. Rows are ordered by (replication, alpha). Failures are
// recorded in the row, not thrown.
std::vector<LocalStabilityRow> run_local_stability(const ExperimentParams& params);
std::vector<LocalStabilitySummary> summarize(const std::vector<LocalStabilityRow>& rows);

struct BenchmarkRow {
  int replication = 0;
  Policy policy = Policy::kDgd;
  double alpha = 0.0;  // best multiplier (dgd only)
  std::string error;
  double opt = 0.0;
  double windowed_gap = 0.0;
  double gap = 0.0;
  double error_n = 0.0;
  double steady_average_total = 0.0;
  double last_amplitude = 0.0;
  double peak_amplitude = 0.0;
};

struct BenchmarkSummary {
  Policy policy = Policy::kDgd;
  int runs = 0;
  int failures = 0;
  double mean_windowed_gap = 0.0;
  double mean_error_n = 0.0;
};

// Per replication: fully random initial state, dgd at each alpha (the best
// by windowed gap is kept) and the three greedy policies. Rows are ordered
// by (replication, policy). Alphas default to {0.01, 0.05, 0.1, 0.5} when
// params.alphas is empty.
std::vector<BenchmarkRow> run_benchmarks(const ExperimentParams& params);
std::vector<BenchmarkSummary> summarize(const std::vector<BenchmarkRow>& rows);

// The generated instances, in replication order.
std::vector<Network> generate_instances(const ExperimentParams& params);

void write_local_csv(const std::vector<LocalStabilityRow>& rows, const ExperimentParams& params,
                     const std::string& path);
void write_benchmark_csv(const std::vector<BenchmarkRow>& rows, const ExperimentParams& params,
                         const std::string& path);

// Runs task(0..n-1) on up to `threads` workers (see ExperimentParams).
void parallel_for(int n, int threads, const std::function<void(int)>& task);
int resolve_threads(int requested);

}  // namespace fluidlb

#endif  // FLUIDLB_EXPERIMENTS_H_
