// fluidlb: command-line front end over the instance JSON schema.
//
// Exit status: 0 on success, 2 on usage errors (bad flags, unreadable or
// malformed input), 1 on domain errors (infeasible or overloaded instance,
// disconnected graph, non-convergence). Errors are reported as one line of
// JSON on stderr: {"error": "<kind>", "message": "..."}.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fluidlb/experiments.h"
#include "fluidlb/instance_io.h"
#include "fluidlb/simplex.h"
#include "fluidlb/sim.h"
#include "fluidlb/stability.h"
#include "fluidlb/static_opt.h"

namespace {

using fluidlb::Error;
using fluidlb::ErrorKind;
using nlohmann::json;

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

int report_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
  return code;
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::kContract, flag + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw Error(ErrorKind::kContract, flag + ": empty list");
  return out;
}

// "auto" (critical step sizes), a single value for every frontend, or one
// value per frontend.
std::vector<double> resolve_eta(const std::string& text, const fluidlb::Network& net,
                                const fluidlb::StaticSolution& sol, double alpha) {
  std::vector<double> eta;
  if (text == "auto") {
    eta = fluidlb::reference_step_sizes(net, sol).eta;
  } else {
    eta = parse_list(text, "--eta");
    if (eta.size() == 1) eta.assign(net.num_frontends(), eta.front());
  }
  if (static_cast<int>(eta.size()) != net.num_frontends()) {
    throw Error(ErrorKind::kContract, "--eta needs 1 or " +
                                          std::to_string(net.num_frontends()) + " values");
  }
  for (double& e : eta) e *= alpha;
  return eta;
}

void emit(const json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << std::endl;
    return;
  }
  std::FILE* f = std::fopen(out_path.c_str(), "w");
  if (!f) throw Error(ErrorKind::kContract, "cannot write '" + out_path + "'");
  const std::string text = doc.dump(2) + "\n";
  std::fputs(text.c_str(), f);
  std::fclose(f);
}

struct SolveArgs {
  std::string instance;
  std::string out;
};

struct SimulateArgs {
  std::string instance;
  std::string policy = "dgd";
  std::string eta = "auto";
  double alpha = 1.0;
  double dt = 0.0;
  double horizon = 100.0;
  std::string init = "equilibrium";
  std::uint64_t seed = 1;
  std::string out;
  double clip = 4.0;
  bool literal_step = false;
  double metric_window = 0.0;
  double amplitude_window = 20.0;
};

struct StabilityArgs {
  std::string instance;
  std::string eta = "auto";
  std::string out;
};

struct ExperimentArgs {
  std::string kind;
  fluidlb::ExperimentParams params;
  std::vector<double> alphas;
  std::string out;
  std::string dump_dir;
};

struct ProjectArgs {
  std::string z;
  std::string x;
  std::string absent;
};

int run_solve(const SolveArgs& a) {
  const auto net = fluidlb::load_network(a.instance);
  const auto sol = fluidlb::solve_static(net);
  emit(fluidlb::solution_to_json(net, sol), a.out);
  return 0;
}

int run_simulate(const SimulateArgs& a) {
  const auto net = fluidlb::load_network(a.instance);
  const auto sol = fluidlb::solve_static(net);
  fluidlb::SimConfig cfg;
  cfg.policy = fluidlb::parse_policy(a.policy);
  cfg.dt = a.dt;
  cfg.horizon = a.horizon;
  cfg.clip = a.clip;
  cfg.scale_step_by_dt = !a.literal_step;
  cfg.metric_window = a.metric_window;
  cfg.amplitude_window = a.amplitude_window;
  if (cfg.policy == fluidlb::Policy::kDgd) cfg.eta = resolve_eta(a.eta, net, sol, a.alpha);

  double weight = 0.0;
  if (a.init == "equilibrium") {
    weight = 0.0;
  } else if (a.init == "random") {
    weight = 1.0;
  } else if (a.init.rfind("mix:", 0) == 0) {
    weight = parse_list(a.init.substr(4), "--init").front();
  } else {
    throw Error(ErrorKind::kContract, "--init must be equilibrium, random or mix:<w>");
  }
  fluidlb::Rng rng(a.seed);
  const auto init = fluidlb::mixed_init(net, sol, rng, weight);
  const auto metrics = fluidlb::run(net, cfg, init, &sol);
  if (!a.out.empty()) {
    fluidlb::write_trajectory_csv(metrics, net.num_frontends(), net.num_backends(), a.out);
  }
  json doc = fluidlb::metrics_to_json(metrics);
  doc["policy"] = fluidlb::policy_name(cfg.policy);
  doc["eta"] = cfg.eta;
  doc["opt_value"] = sol.opt_value;
  std::cout << doc.dump(2) << std::endl;
  return 0;
}

int run_stability(const StabilityArgs& a) {
  const auto net = fluidlb::load_network(a.instance);
  const auto sol = fluidlb::solve_static(net);
  std::vector<double> eta;
  if (a.eta != "auto") eta = resolve_eta(a.eta, net, sol, 1.0);
  const auto report = fluidlb::stability_report(net, sol, eta);
  emit(fluidlb::report_to_json(report), a.out);
  return 0;
}

int run_experiment(ExperimentArgs a) {
  auto& p = a.params;
  if (!a.alphas.empty()) {
    p.alphas = a.alphas;
  } else if (a.kind == "benchmark") {
    p.alphas.clear();
  }
  fluidlb::validate_params(p);
  if (!a.dump_dir.empty()) {
    std::filesystem::create_directories(a.dump_dir);
    const auto nets = fluidlb::generate_instances(p);
    for (std::size_t r = 0; r < nets.size(); ++r) {
      fluidlb::save_network(nets[r], a.dump_dir + "/instance_" + std::to_string(r) + ".json");
    }
  }
  json summary = json::array();
  if (a.kind == "local") {
    const auto rows = fluidlb::run_local_stability(p);
    if (!a.out.empty()) fluidlb::write_local_csv(rows, p, a.out);
    for (const auto& s : fluidlb::summarize(rows)) {
      summary.push_back({{"alpha", s.alpha},
                         {"runs", s.runs},
                         {"failures", s.failures},
                         {"mean_gap", s.mean_gap},
                         {"mean_error_n", s.mean_error_n},
                         {"mean_error_x", s.mean_error_x},
                         {"converged_fraction", s.converged_fraction}});
    }
  } else {
    const auto rows = fluidlb::run_benchmarks(p);
    if (!a.out.empty()) fluidlb::write_benchmark_csv(rows, p, a.out);
    for (const auto& s : fluidlb::summarize(rows)) {
      summary.push_back({{"policy", fluidlb::policy_name(s.policy)},
                         {"runs", s.runs},
                         {"failures", s.failures},
                         {"mean_windowed_gap", s.mean_windowed_gap},
                         {"mean_error_n", s.mean_error_n}});
    }
  }
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

int run_project(const ProjectArgs& a) {
  fluidlb::MaskedVector z = fluidlb::MaskedVector::dense(parse_list(a.z, "--z"));
  if (!a.absent.empty()) {
    for (double idx : parse_list(a.absent, "--absent")) {
      const int j = static_cast<int>(idx);
      if (j < 0 || j >= z.size() || j != idx) {
        throw Error(ErrorKind::kContract, "--absent index out of range");
      }
      z.present[j] = 0;
    }
  }
  json doc;
  if (a.x.empty()) {
    doc["x"] = fluidlb::project_simplex(z);
  } else {
    const auto x = parse_list(a.x, "--x");
    if (x.size() != z.values.size()) {
      throw Error(ErrorKind::kContract, "--x and --z must have the same length");
    }
    doc["v"] = fluidlb::project_tangent_cone(z, x);
  }
  std::cout << doc.dump() << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluid-model load-balancing toolkit"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Optimal static routing as JSON");
  solve_cmd->add_option("instance", solve.instance, "Instance JSON")->required();
  solve_cmd->add_option("--out", solve.out, "Write JSON here instead of stdout");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Integrate the fluid model");
  sim_cmd->add_option("instance", sim.instance, "Instance JSON")->required();
  sim_cmd->add_option("--policy", sim.policy, "dgd, lw, ll or gmsr")->capture_default_str();
  sim_cmd->add_option("--eta", sim.eta,
                      "Step sizes: auto (critical), one value, or one per frontend")
      ->capture_default_str();
  sim_cmd->add_option("--alpha", sim.alpha, "Multiplier applied to --eta")
      ->capture_default_str();
  sim_cmd->add_option("--dt", sim.dt, "Time step; 0 = min(1e-3, min tau / 50)")
      ->capture_default_str();
  sim_cmd->add_option("--horizon", sim.horizon, "Seconds")->capture_default_str();
  sim_cmd->add_option("--init", sim.init, "equilibrium, random or mix:<w>")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Seed for random initial states")
      ->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "Trajectory CSV");
  sim_cmd->add_option("--clip", sim.clip, "Gradient cap as a multiple of c_i")
      ->capture_default_str();
  sim_cmd->add_flag("--literal-step", sim.literal_step,
                    "Use x - eta g instead of x - eta dt g");
  sim_cmd->add_option("--metric-window", sim.metric_window,
                      "Error window in seconds; 0 = 4 max tau")
      ->capture_default_str();
  sim_cmd->add_option("--amplitude-window", sim.amplitude_window,
                      "Window for the amplitude trace, seconds")
      ->capture_default_str();

  StabilityArgs stab;
  auto* stab_cmd = app.add_subcommand("stability", "Local stability report as JSON");
  stab_cmd->add_option("instance", stab.instance, "Instance JSON")->required();
  stab_cmd->add_option("--eta", stab.eta, "auto, one value, or one per frontend")
      ->capture_default_str();
  stab_cmd->add_option("--out", stab.out, "Write JSON here instead of stdout");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Random-instance experiments");
  exp_cmd->add_option("kind", exp.kind, "local or benchmark")
      ->required()
      ->check(CLI::IsMember({"local", "benchmark"}));
  exp_cmd->add_option("--mu-f", exp.params.mu_f, "Mean frontend count")->capture_default_str();
  exp_cmd->add_option("--mu-b", exp.params.mu_b, "Mean backend count")->capture_default_str();
  exp_cmd->add_option("--tau-max", exp.params.tau_max, "Maximum latency, seconds")
      ->capture_default_str();
  exp_cmd->add_option("--rho", exp.params.rho, "Utilisation")->capture_default_str();
  exp_cmd->add_option("--alpha", exp.alphas,
                      "Step-size multipliers (local: 0.5; benchmark: 0.01 0.05 0.1 0.5)");
  exp_cmd->add_option("--reps", exp.params.replications, "Replications")
      ->capture_default_str();
  exp_cmd->add_option("--seed", exp.params.seed, "Seed")->capture_default_str();
  exp_cmd->add_option("--horizon", exp.params.horizon, "Seconds")->capture_default_str();
  exp_cmd->add_option("--dt", exp.params.dt, "Time step; 0 = simulator default")
      ->capture_default_str();
  exp_cmd->add_option("--lognormal-sigma", exp.params.lognormal_sigma,
                      "Dispersion of service times")
      ->capture_default_str();
  exp_cmd->add_option("--threads", exp.params.threads,
                      "Workers; 0 = FLUIDLB_THREADS or all cores")
      ->capture_default_str();
  exp_cmd->add_option("--out", exp.out, "CSV with one row per run plus aggregates");
  exp_cmd->add_option("--dump-instances", exp.dump_dir,
                      "Directory to write the generated instances to");

  ProjectArgs proj;
  auto* proj_cmd = app.add_subcommand(
      "project", "Project z onto the simplex, or onto its tangent cone at --x");
  proj_cmd->add_option("--z", proj.z, "Comma-separated vector")->required();
  proj_cmd->add_option("--x", proj.x, "Point of the simplex (tangent-cone mode)");
  proj_cmd->add_option("--absent", proj.absent, "Comma-separated absent indices");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kExitUsage);
  }

  try {
    if (*solve_cmd) return run_solve(solve);
    if (*sim_cmd) return run_simulate(sim);
    if (*stab_cmd) return run_stability(stab);
    if (*exp_cmd) return run_experiment(exp);
    if (*proj_cmd) return run_project(proj);
  } catch (const Error& e) {
    const int code = e.kind() == ErrorKind::kContract ? kExitUsage : kExitDomain;
    return report_error(fluidlb::error_kind_name(e.kind()), e.what(), code);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kExitDomain);
  }
  return kExitUsage;
}
