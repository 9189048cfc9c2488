#include "fluidlb/sim.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fluidlb {
namespace {

// The running in-flight integrals are rebuilt from the buffers this often
// (in multiples of the buffer capacity) to stop rounding drift.
constexpr int kInflightRefreshFactor = 64;

std::vector<double> arc_values(const Network& net, const Matrix& x) {
  std::vector<double> v(net.num_arcs());
  for (int id = 0; id < net.num_arcs(); ++id) {
    const Arc& a = net.arc(id);
    v[id] = x(a.frontend, a.backend);
  }
  return v;
}

double resolved_dt(const Network& net, const SimConfig& config) {
  return config.dt > 0.0 ? config.dt : default_dt(net);
}

double resolved_window(const Network& net, const SimConfig& config) {
  return config.metric_window > 0.0 ? config.metric_window : 4.0 * net.max_latency();
}

}  // namespace

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::kDgd:
      return "dgd";
    case Policy::kLw:
      return "lw";
    case Policy::kLl:
      return "ll";
    case Policy::kGmsr:
      return "gmsr";
  }
  return "?";
}

Policy parse_policy(const std::string& name) {
  for (Policy p : {Policy::kDgd, Policy::kLw, Policy::kLl, Policy::kGmsr}) {
    if (name == policy_name(p)) return p;
  }
  throw Error(ErrorKind::kContract, "unknown policy '" + name + "'");
}

double default_dt(const Network& net) { return std::min(1e-3, net.min_latency() / 50.0); }

void validate_config(const Network& net, const SimConfig& config, const InitialState& init) {
  const double dt = resolved_dt(net, config);
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kContract, msg); };
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
  if (!(dt < net.min_latency() / 10.0)) {
    std::ostringstream os;
    os << "dt = " << dt << " must be below min latency / 10 = " << net.min_latency() / 10.0;
    fail(os.str());
  }
  if (!(config.horizon >= dt) || !std::isfinite(config.horizon)) {
    fail("horizon must be finite and at least one step");
  }
  if (config.policy == Policy::kDgd) {
    if (static_cast<int>(config.eta.size()) != net.num_frontends()) {
      fail("dgd needs one step size per frontend");
    }
    for (double e : config.eta) {
      if (!(e > 0.0) || !std::isfinite(e)) fail("step sizes must be positive and finite");
    }
  }
  if (!(config.clip > 0.0)) fail("clip multiplier must be positive");
  if (!(config.metric_window >= 0.0)) fail("metric window must be non-negative");
  if (!(config.amplitude_window > 0.0)) fail("amplitude window must be positive");
  if (config.max_trajectory_rows < 0) fail("max trajectory rows must be non-negative");
  if (static_cast<int>(init.workloads.size()) != net.num_backends()) {
    fail("initial workloads have wrong length");
  }
  for (double n : init.workloads) {
    if (!(n >= 0.0) || !std::isfinite(n)) fail("initial workloads must be finite and >= 0");
  }
  if (init.routing.rows() != net.num_frontends() || init.routing.cols() != net.num_backends()) {
    fail("initial routing has wrong shape");
  }
  check_routing(net, init.routing);
}

Simulation::Simulation(const Network& net, SimConfig config, const InitialState& init,
                       const StaticSolution* solution)
    : net_(net),
      // Validated before dt_ sizes the buffers.
      config_((validate_config(net, config, init), std::move(config))),
      solution_(solution),
      dt_(resolved_dt(net, config_)),
      n_(init.workloads),
      x_(init.routing),
      n_history_(net.num_backends(),
                 DelayBuffer::required_capacity(net.max_latency() / dt_)),
      x_history_(net.num_arcs(), DelayBuffer::required_capacity(net.max_latency() / dt_)) {
  if (solution_ && static_cast<int>(solution_->multipliers.size()) != net.num_frontends()) {
    throw Error(ErrorKind::kContract, "solution does not match the network");
  }
  lag_.resize(net.num_arcs());
  for (int id = 0; id < net.num_arcs(); ++id) lag_[id] = net.arc(id).latency / dt_;
  n_history_.reset(n_);
  arc_row_ = arc_values(net, x_);
  x_history_.reset(arc_row_);
  inflight_.resize(net.num_arcs());
  recompute_inflight();
  masks_.resize(static_cast<std::size_t>(net.num_frontends()) * net.num_backends());
  for (int i = 0; i < net.num_frontends(); ++i) {
    const auto m = net.mask(i);
    std::copy(m.begin(), m.end(), masks_.begin() + static_cast<std::size_t>(i) * m.size());
  }
  scratch_z_.resize(net.num_backends());
  scratch_out_.resize(net.num_backends());
}

void Simulation::recompute_inflight() {
  const double now = static_cast<double>(step_);
  for (int id = 0; id < net_.num_arcs(); ++id) {
    inflight_[id] = x_history_.integral(id, now - lag_[id], now);
  }
}

double Simulation::inflight(int arc) const {
  return net_.arrival(net_.arc(arc).frontend) * inflight_[arc] * dt_;
}

double Simulation::inflight_total() const {
  double s = 0.0;
  for (int id = 0; id < net_.num_arcs(); ++id) s += inflight(id);
  return s;
}

double Simulation::delayed_workload(int arc) const {
  return n_history_.value_at(net_.arc(arc).backend, static_cast<double>(step_) - lag_[arc]);
}

MaskedVector Simulation::gradient(int frontend) const {
  MaskedVector g;
  g.values.assign(net_.num_backends(), 0.0);
  g.present = net_.mask(frontend);
  const double cap = solution_ ? config_.clip * solution_->multipliers[frontend]
                               : std::numeric_limits<double>::infinity();
  for (int id : net_.arcs_of(frontend)) {
    const Arc& a = net_.arc(id);
    const double raw =
        1.0 / net_.rate(a.backend).deriv(delayed_workload(id)) + a.latency;
    g.values[a.backend] = std::min(raw, cap);
  }
  return g;
}

void Simulation::route_dgd(Matrix& next) const {
  const int nb = net_.num_backends();
  for (int i = 0; i < net_.num_frontends(); ++i) {
    const double h = config_.eta[i] * (config_.scale_step_by_dt ? dt_ : 1.0);
    const double cap = solution_ ? config_.clip * solution_->multipliers[i]
                                 : std::numeric_limits<double>::infinity();
    std::fill(scratch_z_.begin(), scratch_z_.end(), 0.0);
    for (int id : net_.arcs_of(i)) {
      const Arc& a = net_.arc(id);
      const double raw =
          1.0 / net_.rate(a.backend).deriv(delayed_workload(id)) + a.latency;
      scratch_z_[a.backend] = x_(i, a.backend) - h * std::min(raw, cap);
    }
    workspace_.project_simplex(
        scratch_z_, std::span<const unsigned char>(masks_.data() + static_cast<std::size_t>(i) * nb, nb),
        scratch_out_);
    std::copy(scratch_out_.begin(), scratch_out_.end(), next.row(i));
  }
}

void Simulation::route_greedy(Matrix& next) const {
  for (int i = 0; i < net_.num_frontends(); ++i) {
    int best = -1;
    double best_score = 0.0;
    for (int id : net_.arcs_of(i)) {
      const Arc& a = net_.arc(id);
      const ProcessingRate& r = net_.rate(a.backend);
      const double n = delayed_workload(id);
      double score = 0.0;
      switch (config_.policy) {
        case Policy::kLw:
          score = n;
          break;
        case Policy::kLl: {
          const double l = n > 0.0 ? r.value(n) : 0.0;
          score = a.latency + (l > 0.0 ? n / l : 1.0 / r.deriv(0.0));
          break;
        }
        case Policy::kGmsr:
          score = -r.deriv(n);
          break;
        case Policy::kDgd:
          break;
      }
      // Strict comparison keeps the lowest index on ties.
      if (best < 0 || score < best_score) {
        best = a.backend;
        best_score = score;
      }
    }
    std::fill(next.row(i), next.row(i) + net_.num_backends(), 0.0);
    next(i, best) = 1.0;
  }
}

void Simulation::step() {
  const int nb = net_.num_backends();
  const double now = static_cast<double>(step_);

  std::vector<double> inflow(nb, 0.0);
  for (int id = 0; id < net_.num_arcs(); ++id) {
    const Arc& a = net_.arc(id);
    inflow[a.backend] += net_.arrival(a.frontend) * x_history_.value_at(id, now - lag_[id]);
  }
  std::vector<double> n_next(nb);
  for (int j = 0; j < nb; ++j) {
    n_next[j] = std::max(0.0, n_[j] + dt_ * (inflow[j] - net_.rate(j).value(n_[j])));
    if (!std::isfinite(n_next[j])) {
      std::ostringstream os;
      os << "non-finite workload at backend " << j << ", t = " << time();
      throw Error(ErrorKind::kNumerical, os.str());
    }
  }

  Matrix x_next(net_.num_frontends(), nb);
  if (config_.policy == Policy::kDgd) {
    route_dgd(x_next);
  } else {
    route_greedy(x_next);
  }
  for (double v : x_next.data()) {
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite routing probability at t = " << time();
      throw Error(ErrorKind::kNumerical, os.str());
    }
  }

  n_ = std::move(n_next);
  x_ = std::move(x_next);
  for (int id = 0; id < net_.num_arcs(); ++id) {
    const Arc& a = net_.arc(id);
    arc_row_[id] = x_(a.frontend, a.backend);
  }
  n_history_.push(n_);
  x_history_.push(arc_row_);
  ++step_;

  if (step_ % (static_cast<std::int64_t>(kInflightRefreshFactor) * x_history_.capacity()) == 0) {
    recompute_inflight();
  } else {
    const double t1 = static_cast<double>(step_);
    for (int id = 0; id < net_.num_arcs(); ++id) {
      inflight_[id] += x_history_.integral(id, t1 - 1.0, t1) -
                       x_history_.integral(id, t1 - 1.0 - lag_[id], t1 - lag_[id]);
    }
  }
}

InitialState equilibrium_state(const StaticSolution& sol) {
  return {sol.workloads, sol.routing};
}

Metrics run(const Network& net, const SimConfig& config, const InitialState& init,
            const StaticSolution* solution) {
  Simulation sim(net, config, init, solution);
  const double dt = sim.dt();
  const int nb = net.num_backends();
  const auto n_steps = std::max<std::int64_t>(1, std::llround(config.horizon / dt));
  const double window = resolved_window(net, config);
  const std::int64_t window_start =
      std::max<std::int64_t>(0, n_steps - std::llround(window / dt));
  const std::int64_t steady_start = n_steps / 2;
  const auto amp_steps = std::max<std::int64_t>(1, std::llround(config.amplitude_window / dt));
  const std::int64_t num_windows = (n_steps + amp_steps - 1) / amp_steps;

  Metrics m;
  m.dt = dt;
  m.horizon = static_cast<double>(n_steps) * dt;
  m.steps = n_steps;
  m.metric_window = static_cast<double>(n_steps - window_start) * dt;

  std::vector<double> win_min(static_cast<std::size_t>(num_windows) * nb,
                              std::numeric_limits<double>::infinity());
  std::vector<double> win_max(win_min.size(), -std::numeric_limits<double>::infinity());
  std::int64_t stride = 1;
  if (config.max_trajectory_rows > 0) {
    stride = std::max<std::int64_t>(1, (n_steps + config.max_trajectory_rows) /
                                           config.max_trajectory_rows);
  }

  double sum_total = 0.0, sum_window = 0.0, sum_steady = 0.0;
  double sum_err_n = 0.0, sum_err_x = 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (std::int64_t k = 0;; ++k) {
    const auto& n = sim.workloads();
    const Matrix& x = sim.routing();
    double total = sim.inflight_total();
    for (double v : n) total += v;

    double err_n = 0.0, err_x = 0.0;
    if (solution) {
      double dev = 0.0;
      for (int j = 0; j < nb; ++j) {
        const double d = n[j] - solution->workloads[j];
        err_n += d * d;
        dev = std::max(dev, std::fabs(d));
      }
      for (std::size_t q = 0; q < x.data().size(); ++q) {
        const double d = x.data()[q] - solution->routing.data()[q];
        err_x += d * d;
      }
      err_n = std::sqrt(err_n);
      err_x = std::sqrt(err_x);
      m.max_abs_n_deviation = std::max(m.max_abs_n_deviation, dev);
    }

    // Trapezoid weights.
    const double w_all = (k == 0 || k == n_steps) ? 0.5 : 1.0;
    sum_total += w_all * total;
    if (k >= window_start) {
      const double w = (k == window_start || k == n_steps) ? 0.5 : 1.0;
      sum_window += w * total;
      sum_err_n += w * err_n;
      sum_err_x += w * err_x;
    }
    if (k >= steady_start) {
      const double w = (k == steady_start || k == n_steps) ? 0.5 : 1.0;
      sum_steady += w * total;
    }

    // Amplitude windows are anchored at the horizon; boundary samples count
    // towards both neighbours.
    const std::int64_t back = n_steps - k;
    std::int64_t w_idx = std::min(back / amp_steps, num_windows - 1);
    for (int rep = 0; rep < 2; ++rep) {
      const std::size_t base = static_cast<std::size_t>(num_windows - 1 - w_idx) * nb;
      for (int j = 0; j < nb; ++j) {
        win_min[base + j] = std::min(win_min[base + j], n[j]);
        win_max[base + j] = std::max(win_max[base + j], n[j]);
      }
      if (back % amp_steps != 0 || w_idx == 0 || back / amp_steps >= num_windows) break;
      --w_idx;
    }

    if (config.max_trajectory_rows > 0 && k % stride == 0 &&
        static_cast<int>(m.trajectory.size()) < config.max_trajectory_rows) {
      m.trajectory.push_back({sim.time(), n, x, sim.inflight_total()});
    }
    if (k == n_steps) break;
    sim.step();
  }

  const double span_all = static_cast<double>(n_steps);
  m.average_total = sum_total / span_all;
  const double span_window = static_cast<double>(n_steps - window_start);
  m.window_average_total = span_window > 0.0 ? sum_window / span_window : nan;
  const double span_steady = static_cast<double>(n_steps - steady_start);
  m.steady_average_total = span_steady > 0.0 ? sum_steady / span_steady : nan;
  if (solution) {
    m.gap = m.average_total / solution->opt_value - 1.0;
    m.windowed_gap = m.window_average_total / solution->opt_value - 1.0;
    m.error_n = span_window > 0.0 ? sum_err_n / span_window : nan;
    m.error_x = span_window > 0.0 ? sum_err_x / span_window : nan;
  } else {
    m.gap = m.windowed_gap = m.error_n = m.error_x = m.max_abs_n_deviation = nan;
  }
  m.window_amplitude.resize(num_windows);
  for (std::int64_t w = 0; w < num_windows; ++w) {
    double amp = 0.0;
    for (int j = 0; j < nb; ++j) {
      const std::size_t q = static_cast<std::size_t>(w) * nb + j;
      amp = std::max(amp, 0.5 * (win_max[q] - win_min[q]));
    }
    m.window_amplitude[w] = amp;
  }
  m.final_workloads = sim.workloads();
  m.final_routing = sim.routing();
  m.final_inflight_total = sim.inflight_total();
  return m;
}

}  // namespace fluidlb
