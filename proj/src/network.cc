#include "fluidlb/network.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fluidlb {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kOverload: return "overload";
    case ErrorKind::kDisconnected: return "disconnected";
    case ErrorKind::kNonConvergence: return "non_convergence";
    case ErrorKind::kNumerical: return "numerical";
  }
  return "unknown";
}

namespace {

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorKind::kContract, "invalid network: " + msg);
}

}  // namespace

Network::Network(int num_frontends, int num_backends, std::vector<Arc> arcs,
                 std::vector<double> arrival, std::vector<ProcessingRate> rates)
    : num_frontends_(num_frontends),
      num_backends_(num_backends),
      arcs_(std::move(arcs)),
      arrival_(std::move(arrival)),
      rates_(std::move(rates)) {
  if (num_frontends_ < 1 || num_backends_ < 1) invalid("need at least one frontend and backend");
  if (static_cast<int>(arrival_.size()) != num_frontends_) invalid("arrival size mismatch");
  if (static_cast<int>(rates_.size()) != num_backends_) invalid("rates size mismatch");
  for (int i = 0; i < num_frontends_; ++i) {
    if (!(arrival_[i] > 0.0) || !std::isfinite(arrival_[i])) {
      invalid("arrival rate of frontend " + std::to_string(i) + " must be > 0");
    }
  }

  arc_index_.assign(static_cast<std::size_t>(num_frontends_) * num_backends_, -1);
  for (std::size_t id = 0; id < arcs_.size(); ++id) {
    const Arc& a = arcs_[id];
    if (a.frontend < 0 || a.frontend >= num_frontends_ || a.backend < 0 ||
        a.backend >= num_backends_) {
      invalid("arc " + std::to_string(id) + " has out-of-range endpoints");
    }
    if (!(a.latency > 0.0) || !std::isfinite(a.latency)) {
      invalid("arc " + std::to_string(id) + " must have latency > 0");
    }
    int& slot = arc_index_[static_cast<std::size_t>(a.frontend) * num_backends_ + a.backend];
    if (slot >= 0) invalid("duplicate arc (" + std::to_string(a.frontend) + "," +
                           std::to_string(a.backend) + ")");
    slot = static_cast<int>(id);
  }

  backends_of_.resize(num_frontends_);
  frontends_of_.resize(num_backends_);
  arcs_of_.resize(num_frontends_);
  for (int i = 0; i < num_frontends_; ++i) {
    for (int j = 0; j < num_backends_; ++j) {
      const int id = arc_id(i, j);
      if (id < 0) continue;
      backends_of_[i].push_back(j);
      frontends_of_[j].push_back(i);
      arcs_of_[i].push_back(id);
    }
  }
  for (int i = 0; i < num_frontends_; ++i) {
    if (backends_of_[i].empty()) invalid("frontend " + std::to_string(i) + " has no arc");
  }
  for (int j = 0; j < num_backends_; ++j) {
    if (frontends_of_[j].empty()) invalid("backend " + std::to_string(j) + " has no arc");
  }
}

double Network::latency(int frontend, int backend) const {
  const int id = arc_id(frontend, backend);
  if (id < 0) {
    std::ostringstream os;
    os << "no arc (" << frontend << "," << backend << ")";
    throw Error(ErrorKind::kContract, os.str());
  }
  return arcs_[id].latency;
}

double Network::max_latency() const {
  double m = 0.0;
  for (const Arc& a : arcs_) m = std::max(m, a.latency);
  return m;
}

double Network::min_latency() const {
  double m = arcs_.front().latency;
  for (const Arc& a : arcs_) m = std::min(m, a.latency);
  return m;
}

double Network::total_arrival() const {
  double s = 0.0;
  for (double l : arrival_) s += l;
  return s;
}

std::vector<unsigned char> Network::mask(int frontend) const {
  std::vector<unsigned char> m(num_backends_, 0);
  for (int j : backends_of_[frontend]) m[j] = 1;
  return m;
}

bool Network::operator==(const Network& other) const {
  return num_frontends_ == other.num_frontends_ &&
         num_backends_ == other.num_backends_ && arcs_ == other.arcs_ &&
         arrival_ == other.arrival_ && rates_ == other.rates_;
}

std::vector<double> backend_inflow(const Network& net, const Matrix& routing) {
  std::vector<double> inflow(net.num_backends(), 0.0);
  for (const Arc& a : net.arcs()) {
    inflow[a.backend] += net.arrival(a.frontend) * routing(a.frontend, a.backend);
  }
  return inflow;
}

void check_routing(const Network& net, const Matrix& routing, double tol) {
  if (routing.rows() != net.num_frontends() || routing.cols() != net.num_backends()) {
    throw Error(ErrorKind::kContract, "routing matrix has wrong shape");
  }
  for (int i = 0; i < net.num_frontends(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < net.num_backends(); ++j) {
      const double v = routing(i, j);
      if (!net.has_arc(i, j)) {
        if (v != 0.0) {
          throw Error(ErrorKind::kContract, "routing on a non-existent arc (" +
                                                std::to_string(i) + "," +
                                                std::to_string(j) + ")");
        }
        continue;
      }
      if (!(v >= -tol)) {
        throw Error(ErrorKind::kContract,
                    "negative routing probability at frontend " + std::to_string(i));
      }
      sum += v;
    }
    if (!(std::fabs(sum - 1.0) <= tol)) {
      std::ostringstream os;
      os << "routing row " << i << " sums to " << sum << ", not 1";
      throw Error(ErrorKind::kContract, os.str());
    }
  }
}

}  // namespace fluidlb
