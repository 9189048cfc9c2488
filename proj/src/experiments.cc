#include "fluidlb/experiments.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <thread>

#include "fluidlb/stability.h"

namespace fluidlb {
namespace {

constexpr std::uint64_t kInitStreamOffset = 1ULL << 32;

double great_circle(const std::vector<double>& p, const std::vector<double>& q) {
  const double cx = p[1] * q[2] - p[2] * q[1];
  const double cy = p[2] * q[0] - p[0] * q[2];
  const double cz = p[0] * q[1] - p[1] * q[0];
  const double dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
  return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
}

SimConfig base_config(const ExperimentParams& params) {
  SimConfig cfg;
  cfg.dt = params.dt;
  cfg.horizon = params.horizon;
  cfg.metric_window = 4.0 * params.tau_max;
  cfg.max_trajectory_rows = 0;
  return cfg;
}

std::vector<double> scaled(const std::vector<double>& v, double alpha) {
  std::vector<double> out(v);
  for (double& e : out) e *= alpha;
  return out;
}

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_csv(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f) throw Error(ErrorKind::kContract, "cannot write '" + path + "'");
  return f;
}

// Commas and newlines would break the row.
std::string csv_text(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

void validate_params(const ExperimentParams& p) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kContract, msg); };
  if (!(p.mu_f >= 0.0) || !(p.mu_b >= 0.0)) fail("Poisson means must be >= 0");
  if (!(p.tau_max > 0.0)) fail("tau_max must be positive");
  if (!(p.rho > 0.0 && p.rho < 1.0)) fail("rho must lie in (0, 1)");
  if (p.replications < 1) fail("need at least one replication");
  if (!(p.horizon > 0.0)) fail("horizon must be positive");
  if (!(p.lognormal_sigma >= 0.0)) fail("lognormal sigma must be >= 0");
  if (!(p.min_latency_fraction > 0.0 && p.min_latency_fraction <= 1.0)) {
    fail("min latency fraction must lie in (0, 1]");
  }
  if (!(p.init_weight >= 0.0 && p.init_weight <= 1.0)) fail("init weight must lie in [0, 1]");
  for (double a : p.alphas) {
    if (!(a > 0.0)) fail("step-size multipliers must be positive");
  }
}

Rng instance_rng(std::uint64_t seed, int replication) {
  return Rng(seed, static_cast<std::uint64_t>(replication));
}

Rng init_rng(std::uint64_t seed, int replication) {
  return Rng(seed, kInitStreamOffset + static_cast<std::uint64_t>(replication));
}

Network generate_instance(const ExperimentParams& params, Rng& rng) {
  validate_params(params);
  const int nf = std::max(1, rng.poisson(params.mu_f));
  const int nb = std::max(2, rng.poisson(params.mu_b));

  const double sigma = params.lognormal_sigma;
  std::vector<ProcessingRate> rates;
  double capacity = 0.0;
  for (int j = 0; j < nb; ++j) {
    const int k = std::max(1, rng.poisson(5.0));
    const double s = rng.lognormal(-0.5 * sigma * sigma, sigma);
    rates.push_back(ProcessingRate::Hyperbolic(k, s));
    capacity += *rates.back().capacity();
  }

  std::vector<std::vector<double>> front_pos(nf), back_pos(nb);
  for (auto& p : front_pos) p = rng.sphere_point();
  for (auto& p : back_pos) p = rng.sphere_point();
  std::vector<Arc> arcs;
  const double floor = params.min_latency_fraction * params.tau_max;
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nb; ++j) {
      const double tau = great_circle(front_pos[i], back_pos[j]) / std::numbers::pi * params.tau_max;
      arcs.push_back({i, j, std::max(tau, floor)});
    }
  }

  const auto y = rng.simplex_point(nf);
  std::vector<double> lambda(nf);
  for (int i = 0; i < nf; ++i) lambda[i] = y[i] * params.rho * capacity;
  return Network(nf, nb, std::move(arcs), std::move(lambda), std::move(rates));
}

InitialState mixed_init(const Network& net, const StaticSolution& sol, Rng& rng,
                        double weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw Error(ErrorKind::kContract, "init weight must lie in [0, 1]");
  }
  InitialState s{sol.workloads, sol.routing};
  for (int j = 0; j < net.num_backends(); ++j) {
    const ProcessingRate& r = net.rate(j);
    const double hi = r.family() == ProcessingRate::Family::kHyperbolic
                          ? 2.0 * r.servers()
                          : 2.0 * std::max(sol.workloads[j], 1.0);
    const double n_rand = rng.uniform(0.0, hi);
    s.workloads[j] = (1.0 - weight) * sol.workloads[j] + weight * n_rand;
  }
  for (int i = 0; i < net.num_frontends(); ++i) {
    const auto& nbrs = net.backends_of(i);
    const auto p = rng.simplex_point(static_cast<int>(nbrs.size()));
    for (std::size_t q = 0; q < nbrs.size(); ++q) {
      const int j = nbrs[q];
      s.routing(i, j) = (1.0 - weight) * sol.routing(i, j) + weight * p[q];
    }
  }
  return s;
}

bool converged(const Metrics& m, const StaticSolution& sol) {
  double norm = 0.0;
  for (double n : sol.workloads) norm += n * n;
  return m.error_n < 0.05 * std::sqrt(norm) + 0.05;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FLUIDLB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, int threads, const std::function<void(int)>& task) {
  const int workers = std::min(resolve_threads(threads), std::max(n, 1));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int k = next++; k < n; k = next++) {
      try {
        task(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<Network> generate_instances(const ExperimentParams& params) {
  std::vector<Network> out;
  for (int r = 0; r < params.replications; ++r) {
    Rng rng = instance_rng(params.seed, r);
    out.push_back(generate_instance(params, rng));
  }
  return out;
}

std::vector<LocalStabilityRow> run_local_stability(const ExperimentParams& params) {
  validate_params(params);
  if (params.alphas.empty()) throw Error(ErrorKind::kContract, "no step-size multipliers");
  const int na = static_cast<int>(params.alphas.size());
  const auto instances = generate_instances(params);
  std::vector<LocalStabilityRow> rows(static_cast<std::size_t>(params.replications) * na);

  // Static solutions are shared by the alphas of one replication.
  std::vector<std::unique_ptr<StaticSolution>> solutions(params.replications);
  std::vector<std::vector<double>> eta_crit(params.replications);
  std::vector<std::string> setup_error(params.replications);
  parallel_for(params.replications, params.threads, [&](int r) {
    try {
      solutions[r] = std::make_unique<StaticSolution>(solve_static(instances[r]));
      eta_crit[r] = reference_step_sizes(instances[r], *solutions[r]).eta;
    } catch (const std::exception& e) {
      setup_error[r] = e.what();
    }
  });

  parallel_for(static_cast<int>(rows.size()), params.threads, [&](int k) {
    const int r = k / na;
    LocalStabilityRow& row = rows[k];
    row.replication = r;
    row.alpha = params.alphas[k % na];
    row.frontends = instances[r].num_frontends();
    row.backends = instances[r].num_backends();
    if (!setup_error[r].empty()) {
      row.error = setup_error[r];
      return;
    }
    try {
      const StaticSolution& sol = *solutions[r];
      row.opt = sol.opt_value;
      SimConfig cfg = base_config(params);
      cfg.eta = scaled(eta_crit[r], row.alpha);
      cfg.policy = Policy::kDgd;
      row.lhs = stability_lhs(instances[r], sol, cfg.eta);
      Rng rng = init_rng(params.seed, r);
      const InitialState init = mixed_init(instances[r], sol, rng, params.init_weight);
      const Metrics m = run(instances[r], cfg, init, &sol);
      row.gap = m.gap;
      row.error_n = m.error_n;
      row.error_x = m.error_x;
      row.steady_average_total = m.steady_average_total;
      row.converged = converged(m, sol);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

std::vector<LocalStabilitySummary> summarize(const std::vector<LocalStabilityRow>& rows) {
  std::vector<LocalStabilitySummary> out;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto& s) { return s.alpha == row.alpha; });
    if (it == out.end()) {
      out.push_back({});
      it = out.end() - 1;
      it->alpha = row.alpha;
    }
    if (!row.error.empty()) {
      ++it->failures;
      continue;
    }
    ++it->runs;
    it->mean_gap += row.gap;
    it->mean_error_n += row.error_n;
    it->mean_error_x += row.error_x;
    it->converged_fraction += row.converged ? 1.0 : 0.0;
  }
  for (auto& s : out) {
    if (s.runs == 0) continue;
    s.mean_gap /= s.runs;
    s.mean_error_n /= s.runs;
    s.mean_error_x /= s.runs;
    s.converged_fraction /= s.runs;
  }
  return out;
}

std::vector<BenchmarkRow> run_benchmarks(const ExperimentParams& params) {
  validate_params(params);
  const std::vector<double> alphas =
      params.alphas.empty() ? std::vector<double>{0.01, 0.05, 0.1, 0.5} : params.alphas;
  const std::vector<Policy> greedy{Policy::kLw, Policy::kLl, Policy::kGmsr};
  const int na = static_cast<int>(alphas.size());
  const int per_rep = na + static_cast<int>(greedy.size());
  const auto instances = generate_instances(params);

  std::vector<std::unique_ptr<StaticSolution>> solutions(params.replications);
  std::vector<std::vector<double>> eta_crit(params.replications);
  std::vector<std::string> setup_error(params.replications);
  parallel_for(params.replications, params.threads, [&](int r) {
    try {
      solutions[r] = std::make_unique<StaticSolution>(solve_static(instances[r]));
      eta_crit[r] = reference_step_sizes(instances[r], *solutions[r]).eta;
    } catch (const std::exception& e) {
      setup_error[r] = e.what();
    }
  });

  // One job per (replication, dgd alpha or greedy policy).
  std::vector<BenchmarkRow> jobs(static_cast<std::size_t>(params.replications) * per_rep);
  parallel_for(static_cast<int>(jobs.size()), params.threads, [&](int k) {
    const int r = k / per_rep;
    const int slot = k % per_rep;
    BenchmarkRow& row = jobs[k];
    row.replication = r;
    row.policy = slot < na ? Policy::kDgd : greedy[slot - na];
    row.alpha = slot < na ? alphas[slot] : 0.0;
    if (!setup_error[r].empty()) {
      row.error = setup_error[r];
      return;
    }
    try {
      const StaticSolution& sol = *solutions[r];
      row.opt = sol.opt_value;
      SimConfig cfg = base_config(params);
      cfg.policy = row.policy;
      if (row.policy == Policy::kDgd) cfg.eta = scaled(eta_crit[r], row.alpha);
      Rng rng = init_rng(params.seed, r);
      const InitialState init = mixed_init(instances[r], sol, rng, 1.0);
      const Metrics m = run(instances[r], cfg, init, &sol);
      row.windowed_gap = m.windowed_gap;
      row.gap = m.gap;
      row.error_n = m.error_n;
      row.steady_average_total = m.steady_average_total;
      row.last_amplitude = m.window_amplitude.back();
      row.peak_amplitude =
          *std::max_element(m.window_amplitude.begin(), m.window_amplitude.end());
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  std::vector<BenchmarkRow> rows;
  for (int r = 0; r < params.replications; ++r) {
    const BenchmarkRow* best = nullptr;
    for (int a = 0; a < na; ++a) {
      const BenchmarkRow& cand = jobs[static_cast<std::size_t>(r) * per_rep + a];
      if (!cand.error.empty()) continue;
      if (!best || cand.windowed_gap < best->windowed_gap) best = &cand;
    }
    rows.push_back(best ? *best : jobs[static_cast<std::size_t>(r) * per_rep]);
    for (int g = 0; g < static_cast<int>(greedy.size()); ++g) {
      rows.push_back(jobs[static_cast<std::size_t>(r) * per_rep + na + g]);
    }
  }
  return rows;
}

std::vector<BenchmarkSummary> summarize(const std::vector<BenchmarkRow>& rows) {
  std::vector<BenchmarkSummary> out;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto& s) { return s.policy == row.policy; });
    if (it == out.end()) {
      out.push_back({});
      it = out.end() - 1;
      it->policy = row.policy;
    }
    if (!row.error.empty()) {
      ++it->failures;
      continue;
    }
    ++it->runs;
    it->mean_windowed_gap += row.windowed_gap;
    it->mean_error_n += row.error_n;
  }
  for (auto& s : out) {
    if (s.runs == 0) continue;
    s.mean_windowed_gap /= s.runs;
    s.mean_error_n /= s.runs;
  }
  return out;
}

void write_local_csv(const std::vector<LocalStabilityRow>& rows, const ExperimentParams& p,
                     const std::string& path) {
  FilePtr f = open_csv(path);
  std::fprintf(f.get(),
               "kind,mu_f,mu_b,tau_max,alpha,replication,frontends,backends,opt,lhs,gap,"
               "error_n,error_x,steady_average_total,converged,error\n");
  for (const auto& r : rows) {
    std::fprintf(f.get(),
                 "run,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%s\n",
                 p.mu_f, p.mu_b, p.tau_max, r.alpha, r.replication, r.frontends, r.backends,
                 r.opt, r.lhs, r.gap, r.error_n, r.error_x, r.steady_average_total,
                 r.converged ? 1 : 0, csv_text(r.error).c_str());
  }
  for (const auto& s : summarize(rows)) {
    std::fprintf(f.get(),
                 "aggregate,%.17g,%.17g,%.17g,%.17g,,,,,,%.17g,%.17g,%.17g,,%.17g,%d failures\n",
                 p.mu_f, p.mu_b, p.tau_max, s.alpha, s.mean_gap, s.mean_error_n,
                 s.mean_error_x, s.converged_fraction, s.failures);
  }
}

void write_benchmark_csv(const std::vector<BenchmarkRow>& rows, const ExperimentParams& p,
                         const std::string& path) {
  FilePtr f = open_csv(path);
  std::fprintf(f.get(),
               "kind,mu_f,mu_b,tau_max,replication,policy,alpha,opt,windowed_gap,gap,error_n,"
               "steady_average_total,last_amplitude,peak_amplitude,error\n");
  for (const auto& r : rows) {
    std::fprintf(f.get(),
                 "run,%.17g,%.17g,%.17g,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
                 p.mu_f, p.mu_b, p.tau_max, r.replication, policy_name(r.policy), r.alpha,
                 r.opt, r.windowed_gap, r.gap, r.error_n, r.steady_average_total,
                 r.last_amplitude, r.peak_amplitude, csv_text(r.error).c_str());
  }
  for (const auto& s : summarize(rows)) {
    std::fprintf(f.get(), "aggregate,%.17g,%.17g,%.17g,,%s,,,%.17g,,%.17g,,,,%d failures\n",
                 p.mu_f, p.mu_b, p.tau_max, policy_name(s.policy), s.mean_windowed_gap,
                 s.mean_error_n, s.failures);
  }
}

}  // namespace fluidlb
