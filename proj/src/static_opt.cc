#include "fluidlb/static_opt.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "fluidlb/simplex.h"

namespace fluidlb {
namespace {

// First routing on the segment from uniform routing toward capacity-weighted
// routing whose inflows fit under every capacity.
Matrix feasible_start(const Network& net) {
  const int nf = net.num_frontends();
  const int nb = net.num_backends();
  Matrix uniform(nf, nb);
  Matrix weighted(nf, nb);
  for (int i = 0; i < nf; ++i) {
    const auto& nbrs = net.backends_of(i);
    bool any_unbounded = false;
    double cap_sum = 0.0;
    for (int j : nbrs) {
      uniform(i, j) = 1.0 / nbrs.size();
      const auto cap = net.rate(j).capacity();
      if (!cap) {
        any_unbounded = true;
      } else {
        cap_sum += *cap;
      }
    }
    int unbounded_count = 0;
    for (int j : nbrs) unbounded_count += net.rate(j).capacity() ? 0 : 1;
    for (int j : nbrs) {
      const auto cap = net.rate(j).capacity();
      if (any_unbounded) {
        weighted(i, j) = cap ? 0.0 : 1.0 / unbounded_count;
      } else if (cap_sum > 0.0) {
        weighted(i, j) = *cap / cap_sum;
      } else {
        weighted(i, j) = 1.0 / nbrs.size();
      }
    }
  }

  auto fits = [&](const Matrix& x) {
    const auto inflow = backend_inflow(net, x);
    for (int j = 0; j < nb; ++j) {
      const auto cap = net.rate(j).capacity();
      if (cap && !(inflow[j] < *cap)) return false;
    }
    return true;
  };

  for (double theta = 1.0; theta >= 1.0 / 1024.0; theta *= 0.5) {
    Matrix x(nf, nb);
    for (std::size_t k = 0; k < x.data().size(); ++k) {
      x.data()[k] = theta * uniform.data()[k] + (1.0 - theta) * weighted.data()[k];
    }
    if (fits(x)) return x;
  }
  if (fits(weighted)) return weighted;
  throw Error(ErrorKind::kInfeasible,
              "no feasible starting routing: arrivals exceed reachable capacity");
}

// Objective value only; +infinity when some backend is overloaded.
double objective_or_inf(const Network& net, const Matrix& x) {
  const auto inflow = backend_inflow(net, x);
  double value = 0.0;
  for (int j = 0; j < net.num_backends(); ++j) {
    const auto cap = net.rate(j).capacity();
    if (cap && !(inflow[j] < *cap)) return std::numeric_limits<double>::infinity();
    value += net.rate(j).inverse(inflow[j]);
  }
  for (const Arc& a : net.arcs()) {
    value += net.arrival(a.frontend) * x(a.frontend, a.backend) * a.latency;
  }
  return value;
}

}  // namespace

bool StaticSolution::is_active(const Network& net, int frontend, int backend) const {
  const int id = net.arc_id(frontend, backend);
  return id >= 0 && std::binary_search(active_arcs.begin(), active_arcs.end(), id);
}

std::vector<double> equilibrium_workloads(const Network& net, const Matrix& routing) {
  const auto inflow = backend_inflow(net, routing);
  std::vector<double> n(net.num_backends());
  for (int j = 0; j < net.num_backends(); ++j) {
    const auto cap = net.rate(j).capacity();
    if (cap && !(inflow[j] < *cap)) {
      std::ostringstream os;
      os << "backend overload: backend " << j << " receives " << inflow[j]
         << " >= capacity " << *cap;
      throw Error(ErrorKind::kOverload, os.str());
    }
    n[j] = net.rate(j).inverse(std::max(inflow[j], 0.0));
  }
  return n;
}

ReducedObjective reduced_objective(const Network& net, const Matrix& routing) {
  ReducedObjective r;
  r.workloads = equilibrium_workloads(net, routing);
  r.gradient = Matrix(net.num_frontends(), net.num_backends());
  for (double n : r.workloads) r.value += n;
  for (const Arc& a : net.arcs()) {
    const double lambda = net.arrival(a.frontend);
    r.value += lambda * routing(a.frontend, a.backend) * a.latency;
    r.gradient(a.frontend, a.backend) =
        lambda * (1.0 / net.rate(a.backend).deriv(r.workloads[a.backend]) + a.latency);
  }
  return r;
}

double projected_gradient_norm(const Network& net, const Matrix& routing,
                               const Matrix& gradient) {
  SimplexWorkspace ws;
  const int nb = net.num_backends();
  std::vector<double> neg(nb), v(nb);
  double sq = 0.0;
  for (int i = 0; i < net.num_frontends(); ++i) {
    const auto present = net.mask(i);
    for (int j = 0; j < nb; ++j) neg[j] = present[j] ? -gradient(i, j) : 0.0;
    ws.project_tangent_cone(neg, std::span<const double>(routing.row(i), nb), present, v);
    for (double e : v) sq += e * e;
  }
  return std::sqrt(sq);
}

StaticSolution make_solution(const Network& net, const Matrix& routing,
                             double activity_threshold) {
  StaticSolution sol;
  sol.routing = routing;
  sol.workloads = equilibrium_workloads(net, routing);
  sol.opt_value = 0.0;
  for (double n : sol.workloads) sol.opt_value += n;
  for (const Arc& a : net.arcs()) {
    sol.opt_value += net.arrival(a.frontend) * routing(a.frontend, a.backend) * a.latency;
  }
  for (int id = 0; id < net.num_arcs(); ++id) {
    const Arc& a = net.arc(id);
    if (routing(a.frontend, a.backend) > activity_threshold) sol.active_arcs.push_back(id);
  }
  // c_i: mean marginal cost over the frontend's active arcs.
  sol.multipliers.assign(net.num_frontends(), 0.0);
  std::vector<int> count(net.num_frontends(), 0);
  for (int id : sol.active_arcs) {
    const Arc& a = net.arc(id);
    sol.multipliers[a.frontend] +=
        1.0 / net.rate(a.backend).deriv(sol.workloads[a.backend]) + a.latency;
    ++count[a.frontend];
  }
  for (int i = 0; i < net.num_frontends(); ++i) {
    if (count[i] == 0) {
      throw Error(ErrorKind::kContract,
                  "frontend " + std::to_string(i) + " has no active arc");
    }
    sol.multipliers[i] /= count[i];
  }
  return sol;
}

StaticSolution solve_static(const Network& net, const SolverOptions& options) {
  const int nf = net.num_frontends();
  const int nb = net.num_backends();
  Matrix x = feasible_start(net);
  ReducedObjective cur = reduced_objective(net, x);

  SimplexWorkspace ws;
  std::vector<double> z(nb), proj(nb), row_mean(nf);
  std::vector<std::vector<unsigned char>> masks(nf);
  for (int i = 0; i < nf; ++i) masks[i] = net.mask(i);

  int iter = 0;
  double residual = projected_gradient_norm(net, x, cur.gradient);
  Matrix trial(nf, nb);
  // Spectral (Barzilai-Borwein) trial step; the very first trial is 1.0.
  double bb_step = 1.0;
  while (residual >= options.tolerance) {
    if (iter >= options.max_iterations) {
      std::ostringstream os;
      os << "static solver did not converge after " << iter
         << " iterations; final residual " << residual;
      throw Error(ErrorKind::kNonConvergence, os.str());
    }
    ++iter;
    // Armijo on objective values, up to their rounding floor. Close to the
    // optimum the required decrease drops below that floor; convexity then
    // certifies it exactly, since f(trial) <= f(x) + grad f(trial) . (trial - x).
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::fabs(cur.value);
    std::optional<ReducedObjective> next;
    for (int i = 0; i < nf; ++i) {
      double sum = 0.0;
      for (int j : net.backends_of(i)) sum += cur.gradient(i, j);
      row_mean[i] = sum / static_cast<double>(net.backends_of(i).size());
    }
    double step = bb_step;
    for (int halving = 0; halving < 100 && !next; ++halving, step *= 0.5) {
      double decrease = 0.0;
      for (int i = 0; i < nf; ++i) {
        // Shifting a row by a constant leaves its projection unchanged and
        // avoids cancellation when the spectral step is large.
        for (int j = 0; j < nb; ++j) z[j] = x(i, j) - step * (cur.gradient(i, j) - row_mean[i]);
        ws.project_simplex(z, masks[i], proj);
        for (int j = 0; j < nb; ++j) {
          trial(i, j) = proj[j];
          decrease += cur.gradient(i, j) * (proj[j] - x(i, j));
        }
      }
      const double trial_value = objective_or_inf(net, trial);
      if (!std::isfinite(trial_value)) continue;
      const double target = options.armijo * decrease;
      if (trial_value <= cur.value + target + slack) {
        next = reduced_objective(net, trial);
        continue;
      }
      ReducedObjective candidate = reduced_objective(net, trial);
      double slope = 0.0;
      for (std::size_t k = 0; k < x.data().size(); ++k) {
        slope += candidate.gradient.data()[k] * (trial.data()[k] - x.data()[k]);
      }
      if (slope <= target && target < 0.0) next = std::move(candidate);
    }
    if (!next || trial == x) break;

    double ss = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < x.data().size(); ++k) {
      const double s = trial.data()[k] - x.data()[k];
      ss += s * s;
      sy += s * (next->gradient.data()[k] - cur.gradient.data()[k]);
    }
    bb_step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : 1.0;
    x = trial;
    cur = std::move(*next);
    residual = projected_gradient_norm(net, x, cur.gradient);
    if (options.on_iterate) options.on_iterate(iter, cur.value);
  }
  if (residual >= options.tolerance && residual > 1e-7) {
    std::ostringstream os;
    os << "static solver stalled after " << iter << " iterations; final residual "
       << residual;
    throw Error(ErrorKind::kNonConvergence, os.str());
  }

  StaticSolution sol = make_solution(net, x, options.activity_threshold);
  sol.iterations = iter;
  sol.stationarity = residual;
  return sol;
}

double kkt_residual(const Network& net, const StaticSolution& sol) {
  double worst = 0.0;
  for (int id = 0; id < net.num_arcs(); ++id) {
    const Arc& a = net.arc(id);
    const double g = 1.0 / net.rate(a.backend).deriv(sol.workloads[a.backend]) + a.latency;
    const double c = sol.multipliers[a.frontend];
    if (std::binary_search(sol.active_arcs.begin(), sol.active_arcs.end(), id)) {
      worst = std::max(worst, std::fabs(g - c));
    } else {
      worst = std::max(worst, std::max(0.0, c - g));
    }
  }
  return worst;
}

}  // namespace fluidlb
